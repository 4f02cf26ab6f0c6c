use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

use wgmerge::boss::build_boss;
use wgmerge::format;
use wgmerge::{Alphabet, ColorMatrix};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgmerge")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn build(dir: &TempDir, name: &str, lines: &[&str], k: usize) -> PathBuf {
    let input = dir.path().join(format!("{name}.txt"));
    fs::write(&input, lines.join("\n")).unwrap();
    let out = dir.path().join(format!("{name}.boss"));
    let o = run(&["build", s(&input), "-k", &k.to_string(), "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines().find_map(|l| l.strip_prefix(key)).unwrap_or_else(|| panic!("no {key} in {text}")).trim()
}

#[test]
fn build_and_dump_three_string_collection() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.boss");
    let o = run(&["build", s(&fixture("collection.fa")), "-k", "3", "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "n = 13, m = 16, sigma = 4");

    let dump = stdout(&run(&["dump", "--wheeler", s(&out)]));
    let (i, o_bits) = (field(&dump, "I  ="), field(&dump, "O  ="));
    assert_eq!(i, "101010101010101010101010001");
    assert_eq!(o_bits, "001011010101010010010110101");
    assert_eq!(field(&dump, "C' ="), "10001000101000");
    // the published labels with each node's outgoing run sorted; O holds
    // one `0^outdeg 1` group per node
    let mut expected: Vec<char> = "TGCCCTTATAGAAC".chars().collect();
    let mut at = 0;
    for zeros in o_bits.split_terminator('1') {
        expected[at..at + zeros.len()].sort_unstable();
        at += zeros.len();
    }
    assert_eq!(at, expected.len());
    assert_eq!(field(&dump, "L  ="), expected.iter().collect::<String>());
}

#[test]
fn empty_input_is_rejected() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty.txt");
    fs::write(&input, "").unwrap();
    let o = run(&["build", s(&input), "-k", "3", "-o", s(&dir.path().join("x.boss"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_symbol_reports_line() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.txt");
    fs::write(&input, "ACGT\nACNT\n").unwrap();
    let o = run(&["build", s(&input), "-k", "2", "-o", s(&dir.path().join("x.boss"))]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("'N'"), "{err}");
}

#[test]
fn random_strings_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dna = Alphabet::dna();
    let strings: Vec<String> = (0..1000)
        .map(|_| {
            let len = rng.gen_range(1..=40);
            (0..len).map(|_| dna.chars()[rng.gen_range(0..4)]).collect()
        })
        .collect();
    let dir = TempDir::new().unwrap();
    let lines: Vec<&str> = strings.iter().map(String::as_str).collect();
    let path = build(&dir, "many", &lines, 6);

    let from_file = format::read_boss(&mut fs::File::open(&path).unwrap()).unwrap();
    let encoded: Vec<_> = strings.iter().map(|t| dna.encode(t).unwrap()).collect();
    let direct = build_boss(&encoded, 6, 4).unwrap();
    assert_eq!(from_file, direct);

    let dump = stdout(&run(&["dump", s(&path)]));
    assert!(dump.ends_with(&direct.dump(&dna)));
    let again = build(&dir, "again", &lines, 6);
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn merge_with_itself_is_identity() {
    let dir = TempDir::new().unwrap();
    let g = build(&dir, "g", &["TACACT", "TACTCG", "GACTCA"], 4);
    let out = dir.path().join("m.boss");
    let o = run(&["merge", s(&g), s(&g), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&g).unwrap(), fs::read(&out).unwrap());
}

#[test]
fn merge_matches_build_of_both_inputs() {
    let dir = TempDir::new().unwrap();
    let first = ["ACGTTGCA", "GGGACT", "TTAC"];
    let second = ["CATCAT", "ACGTAA", "GATTACA"];
    let g0 = build(&dir, "a", &first, 3);
    let g1 = build(&dir, "b", &second, 3);
    let both: Vec<&str> = first.iter().chain(&second).copied().collect();
    let whole = build(&dir, "whole", &both, 3);
    let out = dir.path().join("m.boss");
    let o = run(&["merge", s(&g0), s(&g1), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(&whole).unwrap(), fs::read(&out).unwrap());

    let n0 = format::read_boss(&mut fs::File::open(&g0).unwrap()).unwrap().len();
    let n1 = format::read_boss(&mut fs::File::open(&g1).unwrap()).unwrap().len();
    let bits: usize = field(&stdout(&o), "working space:").trim_end_matches(" bits").parse().unwrap();
    assert!(bits <= 4 * (n0 + n1) + 3 * 4 * 64, "{bits} bits");
}

#[test]
fn order_mismatch_exits_three() {
    let dir = TempDir::new().unwrap();
    let g0 = build(&dir, "a", &["ACGT"], 2);
    let g1 = build(&dir, "b", &["ACGT"], 3);
    let o = run(&["merge", s(&g0), s(&g1), "-o", s(&dir.path().join("m.boss"))]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("order mismatch"));
}

#[test]
fn variable_order_merge_writes_lcs() {
    let dir = TempDir::new().unwrap();
    let g0 = build(&dir, "a", &["ACGTTG", "CCA"], 3);
    let g1 = build(&dir, "b", &["TTGCA"], 3);
    let out = dir.path().join("m.boss");
    let o = run(&["merge", "--mode", "vo", s(&g0), s(&g1), "-o", s(&out)]);
    assert_eq!(code(&o), 0);
    let merged = format::read_boss(&mut fs::File::open(&out).unwrap()).unwrap();
    let lcs = format::read_lcs(&mut fs::File::open(out.with_extension("lcs")).unwrap()).unwrap();
    assert_eq!(lcs.len(), merged.node_count());
    assert!(lcs.iter().all(|&l| usize::from(l) <= 3));
}

#[test]
fn colored_merge_needs_matrices() {
    let dir = TempDir::new().unwrap();
    let g0 = build(&dir, "a", &["ACGTTG"], 3);
    let g1 = build(&dir, "b", &["TTGCA"], 3);
    let out = dir.path().join("m.boss");
    let o = run(&["merge", "--mode", "colored", s(&g0), s(&g1), "-o", s(&out)]);
    assert_eq!(code(&o), 2);

    let mut paths = Vec::new();
    for (g, name) in [(&g0, "a.cmat"), (&g1, "b.cmat")] {
        let rows = format::read_boss(&mut fs::File::open(g).unwrap()).unwrap().len();
        let m = ColorMatrix::from_rows(1, (0..rows).map(|_| [true]));
        let p = dir.path().join(name);
        format::write_cmat(&mut fs::File::create(&p).unwrap(), &m).unwrap();
        paths.push(p);
    }
    let o = run(&["merge", "--mode", "colored", s(&g0), s(&g1), "-o", s(&out), "--colors", s(&paths[0]), s(&paths[1])]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let merged = format::read_boss(&mut fs::File::open(&out).unwrap()).unwrap();
    let colors = format::read_cmat(&mut fs::File::open(out.with_extension("cmat")).unwrap()).unwrap();
    assert_eq!((colors.rows(), colors.cols()), (merged.len(), 2));
}

fn wg(sub: &str, pair: &str, extra: &[&str]) -> Output {
    let a = fixture(&format!("{pair}_first.nfa"));
    let b = fixture(&format!("{pair}_second.nfa"));
    let mut args = vec!["wg", sub, s(&a), s(&b)];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn self_loop_pair_has_no_order() {
    let o = wg("merge-sat", "loop", &[]);
    assert_eq!((code(&o), stdout(&o).trim()), (4, "UNSAT"));
    let o = wg("merge-refine", "loop", &[]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).starts_with("NOORDER"));
}

#[test]
fn collapse_pair_is_sat_but_reduced() {
    let o = wg("merge-sat", "collapse", &[]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("SAT "));
    let o = wg("merge-refine", "collapse", &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("REDUCED 4 states"));
}

#[test]
fn eight_state_pair_is_reduced() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("u.wg");
    let o = wg("merge-refine", "pair8", &["-o", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "REDUCED 8 states");
    let o = run(&["wg", "validate", s(&out)]);
    assert_eq!((code(&o), stdout(&o).trim()), (0, "OK"));
    assert!(stdout(&run(&["dump", s(&out)])).contains("F  = 00110100"));
}

#[test]
fn cnf_dump_has_header() {
    let dir = TempDir::new().unwrap();
    let cnf = dir.path().join("u.cnf");
    let o = wg("merge-sat", "collapse", &["--dump-cnf", s(&cnf)]);
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(&cnf).unwrap().starts_with("p cnf "));
}

#[test]
fn validate_reports_violation() {
    let o = run(&["wg", "validate", s(&fixture("not_wheeler.nfa"))]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).starts_with("VIOLATION"));
    let o = run(&["wg", "validate", s(&fixture("pair8_second.nfa"))]);
    assert_eq!(stdout(&o).trim(), "OK");
}

#[test]
fn malformed_automaton_exits_two() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.nfa");
    fs::write(&bad, "nodes 2 source 0\nedge 0 5 a\n").unwrap();
    let o = run(&["wg", "validate", s(&bad)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn outputs_are_deterministic() {
    let a = wg("merge-refine", "pair8", &[]);
    let b = wg("merge-refine", "pair8", &[]);
    assert_eq!(a.stdout, b.stdout);
    let a = wg("merge-sat", "collapse", &[]);
    let b = wg("merge-sat", "collapse", &[]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_sweep_agrees() {
    let o = Command::new(env!("CARGO_BIN_EXE_wgmerge"))
        .args(["verify", "--cases", "10"])
        .env("WM_SEED", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("10 of 10 cases agree"));
}
