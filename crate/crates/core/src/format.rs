//! On-disk formats.
//!
//! All integers are little-endian. A packed sequence is stored as
//! `BSQ1`, length `u64`, bit width `u8`, then the backing `u64` words.
//!
//! - `.boss`: `BOSS`, version `u8`, `k u16`, `sigma u16`, `n u64`, `m u64`,
//!   then `W`, `W⁻` and `last` as packed sequences.
//! - `.wg`: `WGR1`, `n u64`, `m u64`, `sigma u16`, then `I`, `O`, `L`, `C′`
//!   and the final-state bits.
//! - `.lcs`: one `u16` per node.
//! - `.cmat`: `CMAT`, rows `u64`, cols `u32`, then each row padded to whole
//!   bytes, column 0 in the lowest bit.
//!
//! Automata can also be written as text:
//!
//! ```text
//! # comment
//! nodes 3 source 0
//! edge 0 1 a
//! edge 1 2 b
//! finals 2
//! order 0 1 2
//! ```
//!
//! Labels are `a`..`z` (1..26) or positive integers.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::bitseq::{BitVec, PackedInts, RangeError, RawBits, Sym, SymSeq};
use crate::boss::{BossError, BossGraph};
use crate::color::ColorMatrix;
use crate::wheeler::{Edge, Nfa, WheelerError, WheelerGraph};

const BOSS_VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad magic: expected {expected}")]
    Magic { expected: &'static str },
    #[error("unsupported version {0}")]
    Version(u8),
    #[error("corrupt file: {0}")]
    Corrupt(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Boss(#[from] BossError),
    #[error(transparent)]
    Wheeler(#[from] WheelerError),
    #[error(transparent)]
    Range(#[from] RangeError),
}

fn corrupt(msg: impl Into<String>) -> FormatError {
    FormatError::Corrupt(msg.into())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N], FormatError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u8(r: &mut impl Read) -> Result<u8, FormatError> {
    Ok(read_array::<1>(r)?[0])
}

fn read_u16(r: &mut impl Read) -> Result<u16, FormatError> {
    Ok(u16::from_le_bytes(read_array(r)?))
}

fn read_u32(r: &mut impl Read) -> Result<u32, FormatError> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64, FormatError> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_len(r: &mut impl Read) -> Result<usize, FormatError> {
    usize::try_from(read_u64(r)?).map_err(|_| corrupt("length does not fit in memory"))
}

fn expect_magic(r: &mut impl Read, magic: &'static str) -> Result<(), FormatError> {
    let got: [u8; 4] = read_array(r)?;
    if got != magic.as_bytes() {
        return Err(FormatError::Magic { expected: magic });
    }
    Ok(())
}

fn write_words(w: &mut impl Write, len: usize, width: u8, words: &[u64]) -> io::Result<()> {
    w.write_all(b"BSQ1")?;
    w.write_all(&(len as u64).to_le_bytes())?;
    w.write_all(&[width])?;
    for word in words {
        w.write_all(&word.to_le_bytes())?;
    }
    Ok(())
}

fn read_words(r: &mut impl Read) -> Result<(usize, u8, Vec<u64>), FormatError> {
    expect_magic(r, "BSQ1")?;
    let len = read_len(r)?;
    let width = read_u8(r)?;
    if !(1..=64).contains(&width) {
        return Err(corrupt(format!("bit width {width}")));
    }
    let bits = len.checked_mul(width as usize).ok_or_else(|| corrupt("sequence too long"))?;
    let count = bits.div_ceil(64);
    let mut words = Vec::new();
    for _ in 0..count {
        words.push(read_u64(r)?);
    }
    Ok((len, width, words))
}

/// Writes a bit sequence.
pub fn write_bits(w: &mut impl Write, bits: &RawBits) -> io::Result<()> {
    write_words(w, bits.len(), 1, bits.words())
}

pub fn read_bits(r: &mut impl Read) -> Result<RawBits, FormatError> {
    let (len, width, words) = read_words(r)?;
    if width != 1 {
        return Err(corrupt(format!("expected a bit sequence, found width {width}")));
    }
    Ok(RawBits::from_words(words, len))
}

/// Writes a packed integer sequence.
pub fn write_packed(w: &mut impl Write, p: &PackedInts) -> io::Result<()> {
    write_words(w, p.len(), p.width(), p.words())
}

pub fn read_packed(r: &mut impl Read) -> Result<PackedInts, FormatError> {
    let (len, width, words) = read_words(r)?;
    Ok(PackedInts::from_words(words, len, width))
}

fn read_symbols(r: &mut impl Read, sigma: usize) -> Result<SymSeq, FormatError> {
    let p = read_packed(r)?;
    let mut syms = Vec::with_capacity(p.len());
    for v in p.iter() {
        let s = Sym::try_from(v).map_err(|_| corrupt(format!("symbol {v} out of range")))?;
        syms.push(s);
    }
    Ok(SymSeq::new(&syms, sigma)?)
}

pub fn write_boss(w: &mut impl Write, g: &BossGraph) -> io::Result<()> {
    w.write_all(b"BOSS")?;
    w.write_all(&[BOSS_VERSION])?;
    w.write_all(&(g.k() as u16).to_le_bytes())?;
    w.write_all(&(g.sigma() as u16).to_le_bytes())?;
    w.write_all(&(g.node_count() as u64).to_le_bytes())?;
    w.write_all(&(g.len() as u64).to_le_bytes())?;
    write_packed(w, g.w().packed())?;
    write_bits(w, g.wminus().raw())?;
    write_bits(w, g.last().raw())
}

pub fn read_boss(r: &mut impl Read) -> Result<BossGraph, FormatError> {
    expect_magic(r, "BOSS")?;
    let version = read_u8(r)?;
    if version != BOSS_VERSION {
        return Err(FormatError::Version(version));
    }
    let k = read_u16(r)? as usize;
    let sigma = read_u16(r)? as usize;
    let n = read_len(r)?;
    let m = read_len(r)?;
    let w = read_symbols(r, sigma)?;
    let wminus = read_bits(r)?;
    let last = read_bits(r)?;
    if w.len() != m || wminus.len() != m || last.len() != m {
        return Err(corrupt(format!("array lengths {}, {}, {} do not match m = {m}", w.len(), wminus.len(), last.len())));
    }
    let g = BossGraph::from_parts(k, sigma, &w.to_vec(), wminus.into(), last.into())?;
    if g.node_count() != n {
        return Err(corrupt(format!("header says {n} nodes, arrays hold {}", g.node_count())));
    }
    Ok(g)
}

pub fn write_wg(w: &mut impl Write, g: &WheelerGraph) -> io::Result<()> {
    w.write_all(b"WGR1")?;
    w.write_all(&(g.node_count() as u64).to_le_bytes())?;
    w.write_all(&(g.edge_count() as u64).to_le_bytes())?;
    w.write_all(&(g.sigma() as u16).to_le_bytes())?;
    write_bits(w, g.in_bits().raw())?;
    write_bits(w, g.out_bits().raw())?;
    write_packed(w, g.labels().packed())?;
    write_bits(w, g.cprime().raw())?;
    write_bits(w, g.finals().raw())
}

pub fn read_wg(r: &mut impl Read) -> Result<WheelerGraph, FormatError> {
    expect_magic(r, "WGR1")?;
    let n = read_len(r)?;
    let m = read_len(r)?;
    let sigma = read_u16(r)? as usize;
    let indeg = read_bits(r)?;
    let outdeg = read_bits(r)?;
    let labels = read_symbols(r, sigma.max(1))?;
    let cprime = read_bits(r)?;
    let finals = read_bits(r)?;
    let g = WheelerGraph::from_parts(indeg.into(), outdeg.into(), labels, cprime.into(), finals.into())?;
    if g.node_count() != n || g.edge_count() != m {
        return Err(corrupt(format!("header says {n} nodes and {m} edges")));
    }
    Ok(g)
}

pub fn write_lcs(w: &mut impl Write, lcs: &[u16]) -> io::Result<()> {
    for v in lcs {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_lcs(r: &mut impl Read) -> Result<Vec<u16>, FormatError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() % 2 != 0 {
        return Err(corrupt("odd byte count"));
    }
    Ok(bytes.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect())
}

pub fn write_cmat(w: &mut impl Write, m: &ColorMatrix) -> io::Result<()> {
    w.write_all(b"CMAT")?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u32).to_le_bytes())?;
    let mut row = vec![0u8; m.cols().div_ceil(8)];
    for r in 0..m.rows() {
        row.fill(0);
        for c in 0..m.cols() {
            if m.get(r, c) {
                row[c / 8] |= 1 << (c % 8);
            }
        }
        w.write_all(&row)?;
    }
    Ok(())
}

pub fn read_cmat(r: &mut impl Read) -> Result<ColorMatrix, FormatError> {
    expect_magic(r, "CMAT")?;
    let rows = read_len(r)?;
    let cols = read_u32(r)? as usize;
    let mut m = ColorMatrix::new(0, cols);
    let mut buf = vec![0u8; cols.div_ceil(8)];
    for _ in 0..rows {
        r.read_exact(&mut buf)?;
        let row = m.push_zero_row();
        for c in 0..cols {
            if buf[c / 8] >> (c % 8) & 1 == 1 {
                m.set(row, c, true);
            }
        }
    }
    Ok(m)
}

/// An automaton read from text, with its `order` line if present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NfaText {
    pub nfa: Nfa,
    pub order: Option<Vec<usize>>,
}

fn parse_label(tok: &str) -> Option<Sym> {
    let b = tok.as_bytes();
    if b.len() == 1 && b[0].is_ascii_lowercase() {
        return Some(b[0] - b'a' + 1);
    }
    tok.parse::<Sym>().ok().filter(|&c| c > 0)
}

fn label_text(c: Sym) -> String {
    if (1..=26).contains(&c) {
        ((b'a' + c - 1) as char).to_string()
    } else {
        c.to_string()
    }
}

/// Parses the text automaton format.
pub fn parse_nfa(text: &str) -> Result<NfaText, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut finals = Vec::new();
    let mut order = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |msg: String| FormatError::Parse { line, msg };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| err(format!("expected a number, found {t:?}")));
        match toks[0] {
            "nodes" => {
                if toks.len() != 4 || toks[2] != "source" {
                    return Err(err("expected `nodes N source S`".into()));
                }
                if header.is_some() {
                    return Err(err("duplicate `nodes` line".into()));
                }
                header = Some((num(toks[1])?, num(toks[3])?));
            }
            "edge" => {
                if toks.len() != 4 {
                    return Err(err("expected `edge FROM TO LABEL`".into()));
                }
                let c = parse_label(toks[3]).ok_or_else(|| err(format!("bad label {:?}", toks[3])))?;
                edges.push((line, Edge::new(num(toks[1])?, num(toks[2])?, c)));
            }
            "finals" => {
                for t in &toks[1..] {
                    finals.push((line, num(t)?));
                }
            }
            "order" => {
                if order.is_some() {
                    return Err(err("duplicate `order` line".into()));
                }
                order = Some(toks[1..].iter().map(|t| num(t)).collect::<Result<Vec<_>, _>>()?);
            }
            other => return Err(err(format!("unknown directive {other:?}"))),
        }
    }
    let (n, source) = header.ok_or(FormatError::Parse { line: 0, msg: "missing `nodes` line".into() })?;
    for &(line, e) in &edges {
        if e.from >= n || e.to >= n {
            return Err(FormatError::Parse { line, msg: format!("edge {e} names a node outside 0..{n}") });
        }
    }
    for &(line, f) in &finals {
        if f >= n {
            return Err(FormatError::Parse { line, msg: format!("final state {f} outside 0..{n}") });
        }
    }
    let nfa = Nfa::new(n, source, edges.into_iter().map(|(_, e)| e), finals.into_iter().map(|(_, f)| f))?;
    Ok(NfaText { nfa, order })
}

/// Text form of `a`, with an `order` line when given.
pub fn format_nfa(a: &Nfa, order: Option<&[usize]>) -> String {
    let mut out = format!("nodes {} source {}\n", a.node_count(), a.source());
    for e in a.edges() {
        out.push_str(&format!("edge {} {} {}\n", e.from, e.to, label_text(e.label)));
    }
    let finals: Vec<String> = a.final_nodes().iter().map(|v| v.to_string()).collect();
    out.push_str(&format!("finals {}\n", finals.join(" ")));
    if let Some(order) = order {
        let o: Vec<String> = order.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("order {}\n", o.join(" ")));
    }
    out
}

/// `BitVec` from a file's bit sequence.
pub fn read_bitvec(r: &mut impl Read) -> Result<BitVec, FormatError> {
    Ok(read_bits(r)?.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boss::build_boss;
    use crate::wheeler::boss_to_wheeler;

    fn sample() -> BossGraph {
        build_boss(&[vec![4, 1, 2, 1, 2, 4], vec![3, 1, 2, 4, 2, 1]], 3, 4).unwrap()
    }

    #[test]
    fn boss_round_trip() {
        let g = sample();
        let mut buf = Vec::new();
        write_boss(&mut buf, &g).unwrap();
        assert_eq!(&buf[..4], b"BOSS");
        assert_eq!(read_boss(&mut buf.as_slice()).unwrap(), g);
        assert!(read_boss(&mut &buf[..buf.len() - 3]).is_err());
        buf[0] = b'X';
        assert!(matches!(read_boss(&mut buf.as_slice()), Err(FormatError::Magic { .. })));
    }

    #[test]
    fn wg_round_trip() {
        let g = boss_to_wheeler(&sample());
        let mut buf = Vec::new();
        write_wg(&mut buf, &g).unwrap();
        let back = read_wg(&mut buf.as_slice()).unwrap();
        assert_eq!(back.in_bits(), g.in_bits());
        assert_eq!(back.labels(), g.labels());
        assert_eq!(back.finals(), g.finals());
    }

    #[test]
    fn lcs_and_cmat_round_trip() {
        let mut buf = Vec::new();
        write_lcs(&mut buf, &[0, 3, 65535]).unwrap();
        assert_eq!(read_lcs(&mut buf.as_slice()).unwrap(), vec![0, 3, 65535]);
        let mut m = ColorMatrix::new(3, 10);
        m.set(0, 9, true);
        m.set(2, 0, true);
        let mut buf = Vec::new();
        write_cmat(&mut buf, &m).unwrap();
        assert_eq!(buf.len(), 4 + 8 + 4 + 3 * 2);
        assert_eq!(read_cmat(&mut buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn text_round_trip_and_errors() {
        let text = "# two steps\nnodes 3 source 0\nedge 0 1 a\nedge 1 2 30\nfinals 2\norder 0 1 2\n";
        let parsed = parse_nfa(text).unwrap();
        assert_eq!(parsed.order, Some(vec![0, 1, 2]));
        assert_eq!(parsed.nfa.edges()[1].label, 30);
        let again = parse_nfa(&format_nfa(&parsed.nfa, parsed.order.as_deref())).unwrap();
        assert_eq!(again, parsed);
        let bad = "nodes 2 source 0\nedge 0 5 a\n";
        assert!(matches!(parse_nfa(bad), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(parse_nfa("nodes 2 source 0\nedge 0 1 A\n"), Err(FormatError::Parse { line: 2, .. })));
        assert!(matches!(parse_nfa("bogus\n"), Err(FormatError::Parse { line: 1, .. })));
    }
}
