//! BOSS representation of an order-k de Bruijn graph.
//!
//! Nodes are the distinct k-mers of the `$^k`-padded input strings, ranked by
//! colexicographic order (lexicographic order of the reversed k-mers). The
//! graph is stored as three parallel arrays over the concatenated per-node
//! out-edge segments:
//!
//! * `W`: edge labels, `$` for a node without out-edges,
//! * `W⁻`: set on the edge coming from the smallest-ranked source among all
//!   edges entering the same destination,
//! * `last`: set on the final entry of each node segment.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::bitseq::{BitVec, RangeError, RawBits, Sym, SymSeq, SENTINEL};
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BossError {
    #[error("empty collection")]
    EmptyCollection,
    #[error("string {index} is empty")]
    EmptyString { index: usize },
    #[error("order must be at least 1")]
    ZeroOrder,
    #[error("order {0} exceeds the supported maximum of 65535")]
    OrderTooLarge(usize),
    #[error("alphabet size must be in 1..=255, got {0}")]
    BadSigma(usize),
    #[error("symbol {symbol} in string {string} at offset {offset} is outside 1..={sigma}")]
    Symbol { string: usize, offset: usize, symbol: Sym, sigma: usize },
    #[error("node {node} out of range 1..={n}")]
    NodeRange { node: usize, n: usize },
    #[error("position {pos} out of range 1..={m}")]
    PositionRange { pos: usize, m: usize },
    #[error("W position {0} does not carry the W- flag")]
    NotFlagged(usize),
    #[error("W position {0} is an out-degree-0 marker, not an edge")]
    NotAnEdge(usize),
    #[error(transparent)]
    Invalid(#[from] BossViolation),
    #[error(transparent)]
    Range(#[from] RangeError),
}

/// First broken structural invariant of a [`BossGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BossViolation {
    #[error("array lengths differ: W {w}, W- {wminus}, last {last}")]
    LengthMismatch { w: usize, wminus: usize, last: usize },
    #[error("graph has no W entries")]
    Empty,
    #[error("last[m] must be 1")]
    LastNotTerminated,
    #[error("last has {found} ones, expected n = {expected}")]
    LastCount { found: usize, expected: usize },
    #[error("W- has {found} ones, expected n - 1 = {expected}")]
    WminusCount { found: usize, expected: usize },
    #[error("labels of node {node} not strictly increasing at position {pos}")]
    SegmentOrder { node: usize, pos: usize },
    #[error("$ at position {pos} is not alone in the segment of node {node}")]
    SentinelNotAlone { node: usize, pos: usize },
    #[error("$ at position {pos} carries the W- flag")]
    SentinelFlagged { pos: usize },
    #[error("symbol {symbol} at position {pos} outside 0..={sigma}")]
    SymbolRange { pos: usize, symbol: Sym, sigma: usize },
}

/// Succinct order-k de Bruijn graph.
#[derive(Clone)]
pub struct BossGraph {
    k: usize,
    sigma: usize,
    n: usize,
    w: SymSeq,
    wminus: BitVec,
    last: BitVec,
    /// `W[i]` where `W⁻[i] = 1`, `$` elsewhere; drives the LF map.
    flagged: SymSeq,
    /// `first[c]` is the rank of the first node whose k-mer ends with `c`,
    /// for `c` in `1..=sigma + 1`.
    first: Vec<usize>,
}

impl PartialEq for BossGraph {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k
            && self.n == other.n
            && self.w.iter().eq(other.w.iter())
            && self.wminus == other.wminus
            && self.last == other.last
    }
}

impl Eq for BossGraph {}

impl std::fmt::Debug for BossGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BossGraph")
            .field("k", &self.k)
            .field("sigma", &self.sigma)
            .field("n", &self.n)
            .field("W", &self.w.to_vec())
            .field("W-", &self.wminus.to_string())
            .field("last", &self.last.to_string())
            .finish()
    }
}

impl BossGraph {
    /// Assembles a graph from raw arrays and checks every invariant.
    pub fn from_parts(
        k: usize,
        sigma: usize,
        w: &[Sym],
        wminus: BitVec,
        last: BitVec,
    ) -> Result<Self, BossError> {
        let n = last.count_ones();
        let g = Self::from_parts_unchecked(k, sigma, n, w, wminus, last)?;
        validate_boss(&g)?;
        Ok(g)
    }

    /// Assembles a graph without structural checks. Only symbol range is
    /// enforced; run [`validate_boss`] before navigating the result.
    pub fn from_parts_unchecked(
        k: usize,
        sigma: usize,
        n: usize,
        w: &[Sym],
        wminus: BitVec,
        last: BitVec,
    ) -> Result<Self, BossError> {
        if k == 0 {
            return Err(BossError::ZeroOrder);
        }
        if sigma == 0 || sigma > 255 {
            return Err(BossError::BadSigma(sigma));
        }
        let seq = SymSeq::new(w, sigma)?;
        let flagged_syms: Vec<Sym> = w
            .iter()
            .enumerate()
            .map(|(i, &c)| if i < wminus.len() && wminus.raw().get(i) { c } else { SENTINEL })
            .collect();
        let flagged = SymSeq::new(&flagged_syms, sigma)?;
        let mut first = vec![0usize; sigma + 2];
        first[1] = 2;
        for c in 1..=sigma {
            first[c + 1] = first[c] + flagged.count(c as Sym);
        }
        Ok(Self { k, sigma, n, w: seq, wminus, last, flagged, first })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Length of `W`.
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn w(&self) -> &SymSeq {
        &self.w
    }

    pub fn wminus(&self) -> &BitVec {
        &self.wminus
    }

    pub fn last(&self) -> &BitVec {
        &self.last
    }

    /// The symbol-occurrence sequence restricted to flagged positions.
    pub fn flagged(&self) -> &SymSeq {
        &self.flagged
    }

    /// Label at 1-based position `pos`.
    #[inline]
    pub fn label(&self, pos: usize) -> Sym {
        self.w.get(pos)
    }

    #[inline]
    pub fn is_flagged(&self, pos: usize) -> bool {
        self.wminus.get(pos)
    }

    #[inline]
    pub fn is_last(&self, pos: usize) -> bool {
        self.last.get(pos)
    }

    /// Count of nodes whose k-mer ends with `c`, for `c >= 1`.
    pub fn in_flagged_count(&self, c: Sym) -> usize {
        self.flagged.count(c)
    }

    /// Rank of the first node whose k-mer ends with `c`.
    pub fn first_node_with(&self, c: Sym) -> usize {
        self.first[c as usize]
    }

    fn check_node(&self, v: usize) -> Result<(), BossError> {
        if v == 0 || v > self.n {
            return Err(BossError::NodeRange { node: v, n: self.n });
        }
        Ok(())
    }

    fn check_pos(&self, pos: usize) -> Result<(), BossError> {
        if pos == 0 || pos > self.len() {
            return Err(BossError::PositionRange { pos, m: self.len() });
        }
        Ok(())
    }

    /// `W` positions holding the out-edges of node `v`.
    pub fn node_range(&self, v: usize) -> Result<RangeInclusive<usize>, BossError> {
        self.check_node(v)?;
        Ok(self.last.select1(v - 1) + 1..=self.last.select1(v))
    }

    /// Node owning `W` position `pos`.
    pub fn node_of(&self, pos: usize) -> Result<usize, BossError> {
        self.check_pos(pos)?;
        Ok(self.last.rank1(pos - 1) + 1)
    }

    /// Out-edge labels of node `v`, empty for an out-degree-0 node.
    pub fn out_labels(&self, v: usize) -> Result<Vec<Sym>, BossError> {
        Ok(self.node_range(v)?.map(|p| self.label(p)).filter(|&c| c != SENTINEL).collect())
    }

    /// Destination of the flagged edge at `pos` (the LF map).
    pub fn forward(&self, pos: usize) -> Result<usize, BossError> {
        self.check_pos(pos)?;
        if !self.is_flagged(pos) {
            return Err(BossError::NotFlagged(pos));
        }
        Ok(self.lf(pos))
    }

    /// Destination of any real edge at `pos`, flagged or not.
    pub fn edge_target(&self, pos: usize) -> Result<usize, BossError> {
        self.check_pos(pos)?;
        if self.label(pos) == SENTINEL {
            return Err(BossError::NotAnEdge(pos));
        }
        Ok(self.lf(pos))
    }

    #[inline]
    fn lf(&self, pos: usize) -> usize {
        let c = self.label(pos);
        self.first[c as usize] + self.flagged.rank_c(c, pos) - 1
    }

    /// The flagged incoming edge of `v` as `(position, label)`; `None` for node 1.
    pub fn incoming(&self, v: usize) -> Result<Option<(usize, Sym)>, BossError> {
        self.check_node(v)?;
        if v == 1 {
            return Ok(None);
        }
        // last c with first[c] <= v
        let c = (1..=self.sigma).rev().find(|&c| self.first[c] <= v).expect("first[1] = 2");
        let pos = self.flagged.select_c(c as Sym, v - self.first[c] + 1);
        Ok(Some((pos, c as Sym)))
    }

    /// The k-mer of node `v`, recovered by walking `k` edges backwards.
    pub fn node_kmer(&self, v: usize) -> Result<Vec<Sym>, BossError> {
        self.check_node(v)?;
        let mut kmer = vec![SENTINEL; self.k];
        let mut node = v;
        for slot in (0..self.k).rev() {
            match self.incoming(node)? {
                None => break,
                Some((pos, c)) => {
                    kmer[slot] = c;
                    node = self.last.rank1(pos - 1) + 1;
                }
            }
        }
        Ok(kmer)
    }

    /// Text dump, one line per `W` position: `index label wminus last`.
    pub fn dump(&self, alphabet: &crate::Alphabet) -> String {
        let mut out = String::new();
        for pos in 1..=self.len() {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                pos,
                alphabet.char_of(self.label(pos)),
                self.is_flagged(pos) as u8,
                self.is_last(pos) as u8
            );
        }
        out
    }
}

/// Checks every structural invariant and reports the first failure.
pub fn validate_boss(g: &BossGraph) -> Result<(), BossViolation> {
    let m = g.w.len();
    if g.wminus.len() != m || g.last.len() != m {
        return Err(BossViolation::LengthMismatch { w: m, wminus: g.wminus.len(), last: g.last.len() });
    }
    if m == 0 {
        return Err(BossViolation::Empty);
    }
    if !g.last.get(m) {
        return Err(BossViolation::LastNotTerminated);
    }
    if g.last.count_ones() != g.n {
        return Err(BossViolation::LastCount { found: g.last.count_ones(), expected: g.n });
    }
    let expected = g.n - 1;
    if g.wminus.count_ones() != expected {
        return Err(BossViolation::WminusCount { found: g.wminus.count_ones(), expected });
    }
    let mut node = 1;
    let mut seg_start = 1;
    for pos in 1..=m {
        let c = g.w.get(pos);
        if c as usize > g.sigma {
            return Err(BossViolation::SymbolRange { pos, symbol: c, sigma: g.sigma });
        }
        if c == SENTINEL {
            if g.wminus.get(pos) {
                return Err(BossViolation::SentinelFlagged { pos });
            }
            if pos != seg_start || !g.last.get(pos) {
                return Err(BossViolation::SentinelNotAlone { node, pos });
            }
        } else if pos > seg_start {
            let prev = g.w.get(pos - 1);
            if prev == SENTINEL {
                return Err(BossViolation::SentinelNotAlone { node, pos: pos - 1 });
            }
            if prev >= c {
                return Err(BossViolation::SegmentOrder { node, pos });
            }
        }
        if g.last.get(pos) {
            node += 1;
            seg_start = pos + 1;
        }
    }
    Ok(())
}

fn check_collection(collection: &[Vec<Sym>], k: usize, sigma: usize) -> Result<(), BossError> {
    if k == 0 {
        return Err(BossError::ZeroOrder);
    }
    if k > u16::MAX as usize {
        return Err(BossError::OrderTooLarge(k));
    }
    if sigma == 0 || sigma > 255 {
        return Err(BossError::BadSigma(sigma));
    }
    if collection.is_empty() {
        return Err(BossError::EmptyCollection);
    }
    for (string, s) in collection.iter().enumerate() {
        if s.is_empty() {
            return Err(BossError::EmptyString { index: string });
        }
        if let Some((offset, &symbol)) =
            s.iter().enumerate().find(|&(_, &c)| c == SENTINEL || c as usize > sigma)
        {
            return Err(BossError::Symbol { string, offset, symbol, sigma });
        }
    }
    Ok(())
}

/// Builds the BOSS graph of `collection` over symbols `1..=sigma`.
pub fn build_boss(collection: &[Vec<Sym>], k: usize, sigma: usize) -> Result<BossGraph, BossError> {
    build_boss_with(collection, k, sigma, Exec::default())
}

/// [`build_boss`] with an explicit execution policy for the k-mer sort.
pub fn build_boss_with(
    collection: &[Vec<Sym>],
    k: usize,
    sigma: usize,
    exec: Exec,
) -> Result<BossGraph, BossError> {
    check_collection(collection, k, sigma)?;

    // (reversed k-mer, out label or $); sorting gives colex node order with
    // labels ascending inside each node.
    let mut entries: Vec<(Box<[Sym]>, Sym)> = Vec::new();
    for s in collection {
        let mut padded = vec![SENTINEL; k];
        padded.extend_from_slice(s);
        for start in 0..=s.len() {
            let key: Box<[Sym]> = padded[start..start + k].iter().rev().copied().collect();
            let label = if start < s.len() { padded[start + k] } else { SENTINEL };
            entries.push((key, label));
        }
    }
    exec.sort_unstable(&mut entries);
    entries.dedup();

    let mut w = Vec::with_capacity(entries.len());
    let mut wminus = RawBits::with_capacity(entries.len());
    let mut last = RawBits::with_capacity(entries.len());
    let mut seen: HashSet<Box<[Sym]>> = HashSet::new();
    let mut i = 0;
    while i < entries.len() {
        let key = &entries[i].0;
        let mut j = i;
        while j < entries.len() && entries[j].0 == *key {
            j += 1;
        }
        let has_edges = entries[i..j].iter().any(|e| e.1 != SENTINEL);
        let segment: Vec<Sym> = if has_edges {
            entries[i..j].iter().map(|e| e.1).filter(|&c| c != SENTINEL).collect()
        } else {
            vec![SENTINEL]
        };
        let seg_len = segment.len();
        for (t, c) in segment.into_iter().enumerate() {
            let flag = if c == SENTINEL {
                false
            } else {
                let mut dest: Vec<Sym> = Vec::with_capacity(k);
                dest.push(c);
                dest.extend_from_slice(&key[..k - 1]);
                seen.insert(dest.into_boxed_slice())
            };
            w.push(c);
            wminus.push(flag);
            last.push(t + 1 == seg_len);
        }
        i = j;
    }
    let n = last.count_ones();
    BossGraph::from_parts_unchecked(k, sigma, n, &w, wminus.into(), last.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Alphabet;

    fn dna(strings: &[&str]) -> Vec<Vec<Sym>> {
        let a = Alphabet::dna();
        strings.iter().map(|s| a.encode(s).unwrap()).collect()
    }

    #[test]
    fn single_string_order_two() {
        let g = build_boss(&dna(&["AC"]), 2, 4).unwrap();
        assert_eq!(g.w().to_vec(), vec![1, 2, 0]);
        assert_eq!(g.last().to_string(), "111");
        assert_eq!(g.wminus().to_string(), "110");
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.node_kmer(1).unwrap(), vec![0, 0]);
        assert_eq!(g.node_kmer(2).unwrap(), vec![0, 1]);
        assert_eq!(g.node_kmer(3).unwrap(), vec![1, 2]);
        assert_eq!(g.forward(1).unwrap(), 2);
        assert_eq!(g.forward(2).unwrap(), 3);
        assert_eq!(g.forward(3), Err(BossError::NotFlagged(3)));
        assert!(validate_boss(&g).is_ok());
    }

    #[test]
    fn single_symbol_order_one() {
        let g = build_boss(&dna(&["A"]), 1, 4).unwrap();
        assert_eq!(g.w().to_vec(), vec![1, 0]);
        assert_eq!(g.last().to_string(), "11");
        assert_eq!(g.wminus().to_string(), "10");
    }

    #[test]
    fn input_errors() {
        assert_eq!(build_boss(&[], 3, 4), Err(BossError::EmptyCollection));
        assert_eq!(build_boss(&[vec![]], 3, 4), Err(BossError::EmptyString { index: 0 }));
        assert_eq!(build_boss(&[vec![1]], 0, 4), Err(BossError::ZeroOrder));
        assert!(matches!(build_boss(&[vec![1, 5]], 2, 4), Err(BossError::Symbol { offset: 1, .. })));
    }

    #[test]
    fn duplicate_strings_are_merged() {
        let a = build_boss(&dna(&["TACA", "TACA", "ACA"]), 3, 4).unwrap();
        let b = build_boss(&dna(&["TACA", "ACA"]), 3, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_string_still_contributes() {
        let g = build_boss(&dna(&["G", "TACG"]), 4, 4).unwrap();
        let kmers: Vec<Vec<Sym>> = (1..=g.node_count()).map(|v| g.node_kmer(v).unwrap()).collect();
        assert!(kmers.contains(&vec![0, 0, 0, 3]));
    }

    #[test]
    fn duplicate_label_in_segment_is_rejected() {
        let g = build_boss(&dna(&["AC", "AG"]), 2, 4).unwrap();
        let mut w = g.w().to_vec();
        // node $A has labels C,G at positions 2,3
        assert_eq!(&w[1..3], &[2, 3]);
        w[2] = 2;
        let bad = BossGraph::from_parts_unchecked(2, 4, g.node_count(), &w, g.wminus().clone(), g.last().clone())
            .unwrap();
        assert_eq!(validate_boss(&bad), Err(BossViolation::SegmentOrder { node: 2, pos: 3 }));
    }

    #[test]
    fn flipped_last_bit_is_rejected() {
        let g = build_boss(&dna(&["TACACT", "TACTCG"]), 3, 4).unwrap();
        let mut last = g.last().raw().clone();
        last.set(0, !last.get(0));
        let bad = BossGraph::from_parts_unchecked(3, 4, g.node_count(), &g.w().to_vec(), g.wminus().clone(), last.into())
            .unwrap();
        assert!(matches!(validate_boss(&bad), Err(BossViolation::LastCount { .. })));
    }

    #[test]
    fn lf_is_bijection_onto_non_root_nodes() {
        let g = build_boss(&dna(&["TACACT", "TACTCG", "GACTCA"]), 3, 4).unwrap();
        let mut targets = Vec::new();
        for c in 1..=4 {
            let per: Vec<usize> = (1..=g.len())
                .filter(|&p| g.is_flagged(p) && g.label(p) == c)
                .map(|p| g.forward(p).unwrap())
                .collect();
            assert!(per.windows(2).all(|w| w[0] < w[1]), "LF must be order preserving per label");
            targets.extend(per);
        }
        targets.sort_unstable();
        assert_eq!(targets, (2..=g.node_count()).collect::<Vec<_>>());
        for p in 1..=g.len() {
            if g.label(p) != SENTINEL {
                let v = g.edge_target(p).unwrap();
                assert_eq!(*g.node_kmer(v).unwrap().last().unwrap(), g.label(p));
            }
        }
    }
}
