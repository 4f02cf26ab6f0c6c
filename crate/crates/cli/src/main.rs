use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wgmerge::boss::build_boss;
use wgmerge::dbg_merge::{merge, merge_colored, merge_vo, MergeError, MergeStats};
use wgmerge::format::{self, FormatError};
use wgmerge::refine_merge::{refine_merge, RefineOutcome};
use wgmerge::sat_merge::{build_instance, sat_merge_union, SatOutcome};
use wgmerge::wheeler::{
    boss_to_wheeler, decode_wheeler, encode_wheeler, union_of_graphs, validate_wheeler, Nfa, WheelerGraph,
};
use wgmerge::{oracle, Alphabet, BossGraph, Sym};

const EXIT_INPUT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;
const EXIT_NO_ORDER: u8 = 4;

#[derive(Parser)]
#[command(name = "wgmerge", version, about = "Build, inspect and merge succinct de Bruijn graphs and Wheeler automata")]
struct Cli {
    /// Print extra statistics to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a de Bruijn graph from FASTA or one string per line.
    Build {
        input: PathBuf,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value = "ACGT")]
        alphabet: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Merge two de Bruijn graphs of equal order.
    Merge {
        first: PathBuf,
        second: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Plain)]
        mode: Mode,
        /// Color matrices of the two inputs, required in colored mode.
        #[arg(long, num_args = 2, value_names = ["FIRST", "SECOND"])]
        colors: Option<Vec<PathBuf>>,
    },
    /// Wheeler automaton tools.
    #[command(subcommand)]
    Wg(WgCommand),
    /// Print the arrays of a `.boss` or `.wg` file.
    Dump {
        input: PathBuf,
        /// Show a `.boss` file in Wheeler form (I, O, L, C').
        #[arg(long)]
        wheeler: bool,
        #[arg(long)]
        alphabet: Option<String>,
    },
    /// Run merges on random inputs and compare them with slow reference answers.
    Verify {
        #[arg(long, env = "WM_SEED", default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum WgCommand {
    /// Check that an automaton is Wheeler under its node order.
    Validate { input: PathBuf },
    /// Decide whether the union has a Wheeler order keeping both input orders.
    MergeSat {
        #[command(flatten)]
        pair: Pair,
        /// Write the 2-SAT instance in DIMACS form.
        #[arg(long)]
        dump_cnf: Option<PathBuf>,
    },
    /// Merge by partition refinement.
    MergeRefine {
        #[command(flatten)]
        pair: Pair,
        /// Write the resulting automaton as `.wg`; text goes to stdout otherwise.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Pair {
    first: PathBuf,
    second: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Plain,
    Vo,
    Colored,
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, err: e.into() })
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Build { input, k, alphabet, output } => cmd_build(input, *k, alphabet, output),
        Command::Merge { first, second, output, mode, colors } => {
            cmd_merge(first, second, output, *mode, colors.as_deref(), cli.verbose)
        }
        Command::Wg(WgCommand::Validate { input }) => cmd_validate(input),
        Command::Wg(WgCommand::MergeSat { pair, dump_cnf }) => cmd_merge_sat(pair, dump_cnf.as_deref()),
        Command::Wg(WgCommand::MergeRefine { pair, output }) => cmd_merge_refine(pair, output.as_deref(), cli.verbose),
        Command::Dump { input, wheeler, alphabet } => cmd_dump(input, *wheeler, alphabet.as_deref()),
        Command::Verify { seed, cases } => cmd_verify(*seed, *cases),
    }
}

/// Strings from FASTA records, or one per non-empty line when no `>` header is present.
fn parse_sequences(text: &str, alphabet: &Alphabet) -> anyhow::Result<Vec<Vec<Sym>>> {
    let fasta = text.lines().any(|l| l.starts_with('>'));
    let mut out: Vec<Vec<Sym>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if fasta && line.starts_with('>') {
            out.push(Vec::new());
            continue;
        }
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let syms = alphabet.encode(&line.to_uppercase()).with_context(|| format!("line {}", idx + 1))?;
        match out.last_mut() {
            Some(cur) if fasta => cur.extend(syms),
            None if fasta => bail!("line {}: sequence before the first `>` header", idx + 1),
            _ => out.push(syms),
        }
    }
    out.retain(|s| !s.is_empty());
    if out.is_empty() {
        bail!("no sequences in input");
    }
    Ok(out)
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load<T>(path: &Path, read: impl FnOnce(&mut BufReader<File>) -> Result<T, FormatError>) -> anyhow::Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read(&mut BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn save(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write(&mut w).and_then(|()| w.flush()).with_context(|| format!("writing {}", path.display()))
}

fn cmd_build(input: &Path, k: usize, alphabet: &str, output: &Path) -> Outcome {
    if k == 0 {
        return Err(anyhow!("k must be at least 1")).or_exit(EXIT_INPUT);
    }
    let alphabet = Alphabet::new(alphabet).or_exit(EXIT_INPUT)?;
    let text = read_text(input).or_exit(EXIT_INPUT)?;
    let strings = parse_sequences(&text, &alphabet)
        .with_context(|| format!("parsing {}", input.display()))
        .or_exit(EXIT_INPUT)?;
    let g = build_boss(&strings, k, alphabet.sigma()).or_exit(EXIT_INPUT)?;
    save(output, |w| format::write_boss(w, &g)).or_exit(1)?;
    println!("n = {}, m = {}, sigma = {}", g.node_count(), g.len(), g.sigma());
    Ok(0)
}

fn merge_failure(e: MergeError) -> Failure {
    let code = match e {
        MergeError::OrderMismatch(..) => EXIT_MISMATCH,
        MergeError::Color(_) => EXIT_INPUT,
        _ => 1,
    };
    Failure { code, err: e.into() }
}

fn cmd_merge(
    first: &Path,
    second: &Path,
    output: &Path,
    mode: Mode,
    colors: Option<&[PathBuf]>,
    verbose: bool,
) -> Outcome {
    let g0 = load(first, format::read_boss).or_exit(EXIT_INPUT)?;
    let g1 = load(second, format::read_boss).or_exit(EXIT_INPUT)?;
    if g0.sigma() != g1.sigma() {
        return Err(anyhow!("alphabet mismatch: sigma {} vs {}", g0.sigma(), g1.sigma())).or_exit(EXIT_MISMATCH);
    }
    let stats: MergeStats = match mode {
        Mode::Plain => {
            if colors.is_some() {
                return Err(anyhow!("--colors needs --mode colored")).or_exit(EXIT_INPUT);
            }
            let (g, stats) = merge(&g0, &g1).map_err(merge_failure)?;
            save(output, |w| format::write_boss(w, &g)).or_exit(1)?;
            stats
        }
        Mode::Vo => {
            let (g, lcs, stats) = merge_vo(&g0, &g1).map_err(merge_failure)?;
            save(output, |w| format::write_boss(w, &g)).or_exit(1)?;
            save(&output.with_extension("lcs"), |w| format::write_lcs(w, &lcs)).or_exit(1)?;
            stats
        }
        Mode::Colored => {
            let [c0, c1] = colors
                .ok_or_else(|| anyhow!("colored mode needs --colors FIRST SECOND"))
                .or_exit(EXIT_INPUT)?
            else {
                unreachable!("clap enforces two values")
            };
            let m0 = load(c0, format::read_cmat).or_exit(EXIT_INPUT)?;
            let m1 = load(c1, format::read_cmat).or_exit(EXIT_INPUT)?;
            let (g, m, stats) = merge_colored(&g0, &g1, &m0, &m1).map_err(merge_failure)?;
            save(output, |w| format::write_boss(w, &g)).or_exit(1)?;
            save(&output.with_extension("cmat"), |w| format::write_cmat(w, &m)).or_exit(1)?;
            stats
        }
    };
    println!("working space: {} bits", stats.working_space_bits());
    if verbose {
        eprintln!(
            "n0 = {}, n1 = {}, sigma = {}, passes = {}, scan steps = {}",
            stats.n0, stats.n1, stats.sigma, stats.iterations, stats.ops
        );
    }
    Ok(0)
}

/// An automaton with its node order, from either a `.wg` file or the text format.
/// Text input without an `order` line uses the identity order.
fn load_automaton(path: &Path) -> anyhow::Result<(Nfa, Vec<usize>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"WGR1") {
        let g = format::read_wg(&mut bytes.as_slice()).with_context(|| format!("reading {}", path.display()))?;
        let order = (0..g.node_count()).collect();
        return Ok((decode_wheeler(&g), order));
    }
    let text = String::from_utf8(bytes).with_context(|| format!("{} is neither .wg nor text", path.display()))?;
    let parsed = format::parse_nfa(&text).with_context(|| format!("parsing {}", path.display()))?;
    let order = parsed.order.unwrap_or_else(|| (0..parsed.nfa.node_count()).collect());
    Ok((parsed.nfa, order))
}

fn load_wheeler(path: &Path) -> anyhow::Result<WheelerGraph> {
    let (a, order) = load_automaton(path)?;
    encode_wheeler(&a, &order).with_context(|| format!("{} is not Wheeler under its order", path.display()))
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn cmd_validate(input: &Path) -> Outcome {
    let (a, order) = load_automaton(input).or_exit(EXIT_INPUT)?;
    match validate_wheeler(&a, &order) {
        Ok(()) => {
            println!("OK");
            Ok(0)
        }
        Err(v) => {
            println!("VIOLATION {v}");
            Ok(EXIT_MISMATCH)
        }
    }
}

fn cmd_merge_sat(pair: &Pair, dump_cnf: Option<&Path>) -> Outcome {
    let g0 = load_wheeler(&pair.first).or_exit(EXIT_INPUT)?;
    let g1 = load_wheeler(&pair.second).or_exit(EXIT_INPUT)?;
    let union = union_of_graphs(&g0, &g1).or_exit(EXIT_INPUT)?;
    if let Some(path) = dump_cnf {
        let inst = build_instance(&union).or_exit(EXIT_INPUT)?;
        save(path, |w| w.write_all(inst.formula().to_dimacs().as_bytes())).or_exit(1)?;
    }
    match sat_merge_union(union).or_exit(1)? {
        SatOutcome::Sat { order, .. } => {
            println!("SAT {}", join(&order));
            Ok(0)
        }
        SatOutcome::Unsat { .. } => {
            println!("UNSAT");
            Ok(EXIT_NO_ORDER)
        }
    }
}

fn cmd_merge_refine(pair: &Pair, output: Option<&Path>, verbose: bool) -> Outcome {
    let g0 = load_wheeler(&pair.first).or_exit(EXIT_INPUT)?;
    let g1 = load_wheeler(&pair.second).or_exit(EXIT_INPUT)?;
    let outcome = refine_merge(&g0, &g1).or_exit(1)?;
    if verbose {
        let s = outcome.stats();
        eprintln!("refinement steps = {}, scratch bits = {}", s.steps, s.scratch_bits);
    }
    let reduced = match &outcome {
        RefineOutcome::NoOrder { reason, .. } => {
            println!("NOORDER {reason}");
            return Ok(EXIT_NO_ORDER);
        }
        RefineOutcome::Exact { order, reduced, .. } => {
            println!("EXACT {}", join(order));
            reduced
        }
        RefineOutcome::Reduced { reduced, .. } => {
            // some sets were never split: the merged automaton is smaller than
            // the union, and the union's own orderability stays open
            println!("REDUCED {} states", reduced.nfa.node_count());
            reduced
        }
    };
    match output {
        Some(path) => {
            let g = encode_wheeler(&reduced.nfa, &reduced.order).or_exit(1)?;
            save(path, |w| format::write_wg(w, &g)).or_exit(1)?;
        }
        None => print!("{}", format::format_nfa(&reduced.nfa, Some(&reduced.order))),
    }
    Ok(0)
}

fn letters() -> Alphabet {
    Alphabet::new("abcdefghijklmnopqrstuvwxyz").expect("valid alphabet")
}

fn print_wheeler(g: &WheelerGraph, alphabet: &Alphabet) {
    let labels: String = (1..=g.edge_count()).map(|p| alphabet.char_of(g.labels().get(p))).collect();
    println!("I  = {}", g.in_bits());
    println!("O  = {}", g.out_bits());
    println!("L  = {labels}");
    println!("C' = {}", g.cprime());
    println!("F  = {}", g.finals());
}

fn cmd_dump(input: &Path, wheeler: bool, alphabet: Option<&str>) -> Outcome {
    let mut magic = [0u8; 4];
    File::open(input)
        .and_then(|mut f| f.read_exact(&mut magic))
        .with_context(|| format!("reading {}", input.display()))
        .or_exit(EXIT_INPUT)?;
    let alphabet = alphabet.map(Alphabet::new).transpose().or_exit(EXIT_INPUT)?;
    if &magic == b"WGR1" {
        let g = load(input, format::read_wg).or_exit(EXIT_INPUT)?;
        print_wheeler(&g, &alphabet.unwrap_or_else(letters));
        return Ok(0);
    }
    let g: BossGraph = load(input, format::read_boss).or_exit(EXIT_INPUT)?;
    let alphabet = alphabet.unwrap_or_default();
    println!("k = {}, sigma = {}, n = {}, m = {}", g.k(), g.sigma(), g.node_count(), g.len());
    if wheeler {
        print_wheeler(&boss_to_wheeler(&g), &alphabet);
    } else {
        print!("{}", g.dump(&alphabet));
    }
    Ok(0)
}

fn cmd_verify(seed: u64, cases: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for i in 0..cases {
        let (c0, c1, k, sigma) = oracle::random_collection_pair(&mut rng);
        let g0 = build_boss(&c0, k, sigma).or_exit(1)?;
        let g1 = build_boss(&c1, k, sigma).or_exit(1)?;
        let all: Vec<Vec<Sym>> = c0.into_iter().chain(c1).collect();
        let (merged, _) = merge(&g0, &g1).map_err(merge_failure)?;
        if merged != oracle::naive_boss(&all, k, sigma).or_exit(1)? {
            failures += 1;
            eprintln!("case {i}: merged graph differs from rebuild (k = {k}, sigma = {sigma})");
        }
    }
    println!("de Bruijn merge: {} of {cases} cases agree", cases - failures);
    let mut wrong = 0usize;
    for i in 0..cases {
        let ((a0, o0), (a1, o1)) = oracle::random_union_pair(&mut rng, 9);
        let outcome = wgmerge::sat_merge::sat_merge(&a0, &o0, &a1, &o1).or_exit(1)?;
        let union = match &outcome {
            SatOutcome::Sat { union, .. } | SatOutcome::Unsat { union, .. } => union,
        };
        let exists = oracle::exhaustive_corder(union).or_exit(1)?.is_some();
        if exists != outcome.is_sat() {
            wrong += 1;
            eprintln!("case {i}: 2-SAT says {}, search says {exists}", outcome.is_sat());
        }
    }
    println!("Wheeler order decision: {} of {cases} cases agree", cases - wrong);
    Ok(if failures + wrong == 0 { 0 } else { EXIT_MISMATCH })
}
