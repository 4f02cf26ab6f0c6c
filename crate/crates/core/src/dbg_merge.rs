//! Merging two BOSS graphs of the same order in `O(mk)` time.
//!
//! The merge runs in three phases:
//!
//! 1. Count, for each symbol, how many nodes of each input end with it and
//!    lay out the initial interleaving `Z` ordered by last symbol only.
//! 2. Run `k - 1` refinement passes. Pass `h` reads the interleaving sorted by
//!    the length-`(h-1)` colex prefixes and writes the one sorted by length-`h`
//!    prefixes, recording in `B` the positions where adjacent nodes first
//!    differ.
//! 3. Walk the final interleaving once, fusing adjacent equal k-mers coming
//!    from the two inputs and emitting the merged `W`, `W⁻`, `last`.
//!
//! In [`MergeMode::Plain`] the block array keeps two bits per position and
//! the scratch space is exactly `4(n0 + n1)` bits plus three per-symbol
//! counter arrays. In [`MergeMode::VariableOrder`] the block array keeps full
//! integers, which double as the LCS array of the merged graph.

use thiserror::Error;

use crate::bitseq::{BitVec, PackedInts, RawBits, Sym, SENTINEL};
use crate::boss::{BossError, BossGraph};
use crate::color::{ColorError, ColorMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("nothing to merge")]
    Empty,
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error(transparent)]
    Boss(#[from] BossError),
    #[error("internal merge error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MergeMode {
    /// Two-bit block array.
    #[default]
    Plain,
    /// Full-integer block array, reusable as the LCS array.
    VariableOrder,
}

/// Final classification of a block-array entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockClass {
    /// Same k-mer as the previous position.
    Zero,
    /// Differs from the previous position only in the first symbol.
    Full,
    /// Differs earlier than that.
    Mid,
}

/// Logical scratch allocations made by a merge.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScratchLedger {
    bits: usize,
    words: usize,
    output_bits: usize,
}

impl ScratchLedger {
    fn bits(&mut self, n: usize) {
        self.bits += n;
    }

    fn words(&mut self, n: usize) {
        self.words += n;
    }

    fn output(&mut self, n: usize) {
        self.output_bits += n;
    }
}

/// Counters reported by every merge entry point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MergeStats {
    pub n0: usize,
    pub n1: usize,
    pub sigma: usize,
    /// Bits of scratch bitvectors and packed arrays.
    pub scratch_bits: usize,
    /// Machine words of per-symbol counters.
    pub scratch_words: usize,
    /// Bits of the block array when it is part of the output.
    pub output_bits: usize,
    /// Inner scan steps over `W` entries, all phases.
    pub ops: u64,
    /// Refinement passes executed.
    pub iterations: usize,
}

impl MergeStats {
    pub fn working_space_bits(&self) -> usize {
        self.scratch_bits + 64 * self.scratch_words
    }

    /// `4(n0 + n1)` bits plus three words per symbol.
    pub fn plain_budget_bits(&self) -> usize {
        4 * (self.n0 + self.n1) + 3 * 64 * self.sigma
    }
}

#[derive(Clone, Debug)]
enum Blocks {
    /// State 0: never set. Bit value 2 marks "set in an even pass", 1 marks
    /// "set in an odd pass"; a pass sets its bit on every block start it
    /// triggers, so state 3 means "set at least two passes ago".
    TwoBit(PackedInts),
    Full(PackedInts),
}

#[inline]
fn parity_code(h: usize) -> u64 {
    if h.is_multiple_of(2) {
        2
    } else {
        1
    }
}

/// Merge in progress between two graphs.
#[derive(Clone, Debug)]
pub struct MergeState {
    k: usize,
    sigma: usize,
    n0: usize,
    n1: usize,
    zprev: RawBits,
    zcur: RawBits,
    blocks: Blocks,
    /// Next free position per symbol; index `c - 1`.
    next: Vec<usize>,
    start: Vec<usize>,
    block_id: Vec<usize>,
    h: usize,
    ledger: ScratchLedger,
    ops: u64,
}

/// Phase 1: symbol counts, the initial interleaving and block boundaries.
pub fn init_phase1(g0: &BossGraph, g1: &BossGraph, mode: MergeMode) -> Result<MergeState, MergeError> {
    if g0.k() != g1.k() {
        return Err(MergeError::OrderMismatch(g0.k(), g1.k()));
    }
    let k = g0.k();
    let sigma = g0.sigma().max(g1.sigma());
    let (n0, n1) = (g0.node_count(), g1.node_count());
    let total = n0 + n1;
    let mut ledger = ScratchLedger::default();

    let zprev = RawBits::zeros(total);
    let mut zcur = RawBits::zeros(total);
    ledger.bits(2 * total);

    let mut blocks = match mode {
        MergeMode::Plain => {
            ledger.bits(2 * total);
            Blocks::TwoBit(PackedInts::zeros(total, 2))
        }
        MergeMode::VariableOrder => {
            let width = PackedInts::width_for(k as u64);
            ledger.output(width as usize * total);
            Blocks::Full(PackedInts::zeros(total, width))
        }
    };
    let mut next = vec![0usize; sigma];
    let mut start = vec![0usize; sigma];
    let block_id = vec![0usize; sigma];
    ledger.words(3 * sigma);

    zcur.set(1, true);
    let mut pos = 3;
    for c in 1..=sigma {
        let (l0, l1) = (g0.in_flagged_count(c as Sym), g1.in_flagged_count(c as Sym));
        start[c - 1] = pos;
        next[c - 1] = pos;
        for off in 0..l1 {
            zcur.set(pos - 1 + l0 + off, true);
        }
        pos += l0 + l1;
    }
    debug_assert_eq!(pos, total + 1);

    match &mut blocks {
        Blocks::TwoBit(b) => {
            b.set(0, 1);
            for &s in &start {
                if s <= total {
                    b.set(s - 1, 1);
                }
            }
        }
        Blocks::Full(b) => {
            b.set(0, 1);
            for &s in &start {
                if s <= total {
                    b.set(s - 1, 1);
                }
            }
        }
    }

    Ok(MergeState { k, sigma, n0, n1, zprev, zcur, blocks, next, start, block_id, h: 1, ledger, ops: 0 })
}

impl MergeState {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    /// Length of the current prefix order: `1` after phase 1, `k` when done.
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n0 + self.n1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Current interleaving; 0-based, bit `b` means "next node of input `b`".
    pub fn z(&self) -> &RawBits {
        &self.zcur
    }

    pub fn is_done(&self) -> bool {
        self.h >= self.k
    }

    /// Full block value at 1-based position `q`; only in variable-order mode.
    pub fn block_value(&self, q: usize) -> Option<u64> {
        match &self.blocks {
            Blocks::Full(b) => Some(b.get(q - 1)),
            Blocks::TwoBit(_) => None,
        }
    }

    /// Two-bit state at 1-based position `q`; only in plain mode.
    pub fn block_state(&self, q: usize) -> Option<u8> {
        match &self.blocks {
            Blocks::TwoBit(b) => Some(b.get(q - 1) as u8),
            Blocks::Full(_) => None,
        }
    }

    /// Classification of position `q` after the passes run so far: `Full`
    /// means the block started in the latest pass.
    pub fn class(&self, q: usize) -> BlockClass {
        match &self.blocks {
            Blocks::TwoBit(b) => match b.get(q - 1) {
                0 => BlockClass::Zero,
                s if s == parity_code(self.h) => BlockClass::Full,
                _ => BlockClass::Mid,
            },
            Blocks::Full(b) => match b.get(q - 1) {
                0 => BlockClass::Zero,
                v if v == self.h as u64 => BlockClass::Full,
                _ => BlockClass::Mid,
            },
        }
    }

    pub fn stats(&self) -> MergeStats {
        MergeStats {
            n0: self.n0,
            n1: self.n1,
            sigma: self.sigma,
            scratch_bits: self.ledger.bits,
            scratch_words: self.ledger.words,
            output_bits: self.ledger.output_bits,
            ops: self.ops,
            iterations: self.h - 1,
        }
    }

    #[inline]
    fn is_boundary(&self, p: usize, h: usize) -> bool {
        match &self.blocks {
            Blocks::TwoBit(b) => {
                let s = b.get(p - 1);
                s != 0 && s != parity_code(h)
            }
            Blocks::Full(b) => {
                let v = b.get(p - 1);
                v != 0 && v != h as u64
            }
        }
    }

    #[inline]
    fn mark(&mut self, q: usize, h: usize) {
        match &mut self.blocks {
            Blocks::TwoBit(b) => {
                let s = b.get(q - 1);
                b.set(q - 1, s | parity_code(h));
            }
            Blocks::Full(b) => {
                if b.get(q - 1) == 0 {
                    b.set(q - 1, h as u64);
                }
            }
        }
    }

    /// One refinement pass: from prefixes of length `h - 1` to length `h`.
    pub fn iterate(&mut self, g0: &BossGraph, g1: &BossGraph) {
        assert!(self.h < self.k, "all {} passes already done", self.k - 1);
        let h = self.h + 1;
        std::mem::swap(&mut self.zprev, &mut self.zcur);
        self.next.copy_from_slice(&self.start);
        self.block_id.iter_mut().for_each(|x| *x = 0);
        let graphs = [g0, g1];
        let mut cursor = [1usize, 1usize];
        let mut id = 0usize;
        for p in 1..=self.len() {
            if self.is_boundary(p, h) {
                id = p;
            }
            let b = self.zprev.get(p - 1) as usize;
            let g = graphs[b];
            loop {
                let pos = cursor[b];
                self.ops += 1;
                if g.is_flagged(pos) {
                    let c = g.label(pos) as usize;
                    let q = self.next[c - 1];
                    self.next[c - 1] += 1;
                    self.zcur.set(q - 1, b == 1);
                    if self.block_id[c - 1] != id {
                        self.block_id[c - 1] = id;
                        self.mark(q, h);
                    }
                }
                cursor[b] += 1;
                if g.is_last(pos) {
                    break;
                }
            }
        }
        self.zcur.set(0, false);
        self.zcur.set(1, true);
        // position 1 is never written by the scan but stays a block start
        self.mark(1, h);
        self.h = h;
    }
}

/// Runs phase 1 and all `k - 1` refinement passes.
pub fn run_merge_plan(g0: &BossGraph, g1: &BossGraph, mode: MergeMode) -> Result<MergeState, MergeError> {
    let mut st = init_phase1(g0, g1, mode)?;
    while !st.is_done() {
        st.iterate(g0, g1);
    }
    Ok(st)
}

/// One merged `W` entry with the input positions it came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnionEntry {
    pub label: Sym,
    pub flagged: bool,
    pub last: bool,
    pub from0: Option<usize>,
    pub from1: Option<usize>,
}

/// Receives the merged graph one entry at a time.
pub trait UnionSink {
    fn entry(&mut self, e: UnionEntry);
}

/// Sink that materialises the merged graph.
#[derive(Debug, Default)]
pub struct GraphSink {
    w: Vec<Sym>,
    wminus: RawBits,
    last: RawBits,
}

impl GraphSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn finish(self, k: usize, sigma: usize) -> Result<BossGraph, BossError> {
        BossGraph::from_parts(k, sigma, &self.w, BitVec::new(self.wminus), BitVec::new(self.last))
    }
}

impl UnionSink for GraphSink {
    fn entry(&mut self, e: UnionEntry) {
        self.w.push(e.label);
        self.wminus.push(e.flagged);
        self.last.push(e.last);
    }
}

fn segment(g: &BossGraph, start: usize) -> (usize, usize) {
    let mut end = start;
    while !g.is_last(end) {
        end += 1;
    }
    (start, end)
}

/// Phase 3: emits the merged graph into `sink`.
pub fn build_union<S: UnionSink>(
    g0: &BossGraph,
    g1: &BossGraph,
    st: &mut MergeState,
    sink: &mut S,
) -> Result<(), MergeError> {
    if !st.is_done() {
        return Err(MergeError::Internal(format!("plan stopped at pass {} of {}", st.h, st.k)));
    }
    let total = st.len();
    let graphs = [g0, g1];
    let mut cursor = [1usize, 1usize];
    st.block_id.iter_mut().for_each(|x| *x = 0);
    let mut window = 0usize;
    let mut entries: Vec<(Sym, Option<usize>, Option<usize>)> = Vec::new();
    let mut q = 1;
    while q <= total {
        let b = st.zcur.get(q - 1) as usize;
        let fused = q < total && st.class(q + 1) == BlockClass::Zero;
        match st.class(q) {
            _ if q == 1 => window = q,
            BlockClass::Mid => window = q,
            BlockClass::Full => {}
            BlockClass::Zero => {
                return Err(MergeError::Internal(format!("unpaired equal k-mer at position {q}")));
            }
        }
        entries.clear();
        if fused {
            if st.zcur.get(q) as usize == b {
                return Err(MergeError::Internal(format!("equal k-mers from one input at position {q}")));
            }
            let (s0, e0) = segment(g0, cursor[0]);
            let (s1, e1) = segment(g1, cursor[1]);
            cursor = [e0 + 1, e1 + 1];
            st.ops += (e0 - s0 + 1 + e1 - s1 + 1) as u64;
            let (mut i, mut j) = (s0, s1);
            let skip = |g: &BossGraph, p: usize, e: usize| p <= e && g.label(p) == SENTINEL;
            if skip(g0, i, e0) {
                i += 1;
            }
            if skip(g1, j, e1) {
                j += 1;
            }
            while i <= e0 || j <= e1 {
                let a = if i <= e0 { Some(g0.label(i)) } else { None };
                let c = if j <= e1 { Some(g1.label(j)) } else { None };
                match (a, c) {
                    (Some(x), Some(y)) if x == y => {
                        entries.push((x, Some(i), Some(j)));
                        i += 1;
                        j += 1;
                    }
                    (Some(x), Some(y)) if x < y => {
                        entries.push((x, Some(i), None));
                        i += 1;
                    }
                    (Some(x), None) => {
                        entries.push((x, Some(i), None));
                        i += 1;
                    }
                    (_, Some(y)) => {
                        entries.push((y, None, Some(j)));
                        j += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
            if entries.is_empty() {
                entries.push((SENTINEL, Some(s0), Some(s1)));
            }
            q += 2;
        } else {
            let g = graphs[b];
            let (s, e) = segment(g, cursor[b]);
            cursor[b] = e + 1;
            st.ops += (e - s + 1) as u64;
            for p in s..=e {
                let src = Some(p);
                entries.push(if b == 0 { (g.label(p), src, None) } else { (g.label(p), None, src) });
            }
            q += 1;
        }
        let count = entries.len();
        for (t, &(label, from0, from1)) in entries.iter().enumerate() {
            let flagged = label != SENTINEL && st.block_id[label as usize - 1] != window;
            if flagged {
                st.block_id[label as usize - 1] = window;
            }
            sink.entry(UnionEntry { label, flagged, last: t + 1 == count, from0, from1 });
        }
    }
    Ok(())
}

/// Merges two graphs of the same order.
pub fn merge(g0: &BossGraph, g1: &BossGraph) -> Result<(BossGraph, MergeStats), MergeError> {
    let mut st = run_merge_plan(g0, g1, MergeMode::Plain)?;
    let mut sink = GraphSink::new();
    build_union(g0, g1, &mut st, &mut sink)?;
    let g = sink.finish(st.k, st.sigma)?;
    Ok((g, st.stats()))
}

/// Merges in variable-order mode and returns the LCS array of the result:
/// entry `v` (0-based) is the length of the longest common suffix of the
/// k-mers of nodes `v` and `v + 1` (1-based), with entry 0 set to 0.
pub fn merge_vo(g0: &BossGraph, g1: &BossGraph) -> Result<(BossGraph, Vec<u16>, MergeStats), MergeError> {
    let mut st = run_merge_plan(g0, g1, MergeMode::VariableOrder)?;
    let lcs: Vec<u16> = (1..=st.len())
        .filter_map(|q| match st.block_value(q) {
            Some(0) => None,
            Some(v) => Some((v - 1) as u16),
            None => unreachable!("variable-order state has integer blocks"),
        })
        .collect();
    let mut sink = GraphSink::new();
    build_union(g0, g1, &mut st, &mut sink)?;
    let g = sink.finish(st.k, st.sigma)?;
    if lcs.len() != g.node_count() {
        return Err(MergeError::Internal(format!("{} LCS entries for {} nodes", lcs.len(), g.node_count())));
    }
    Ok((g, lcs, st.stats()))
}

struct ColorSink<'a> {
    graph: GraphSink,
    m0: &'a ColorMatrix,
    m1: &'a ColorMatrix,
    out: ColorMatrix,
}

impl UnionSink for ColorSink<'_> {
    fn entry(&mut self, e: UnionEntry) {
        self.graph.entry(e);
        let row = self.out.push_zero_row();
        if let Some(p) = e.from0 {
            for c in 0..self.m0.cols() {
                if self.m0.get(p - 1, c) {
                    self.out.set(row, c, true);
                }
            }
        }
        if let Some(p) = e.from1 {
            let shift = self.m0.cols();
            for c in 0..self.m1.cols() {
                if self.m1.get(p - 1, c) {
                    self.out.set(row, shift + c, true);
                }
            }
        }
    }
}

/// Merges two colored graphs; colors of `g1` are shifted past those of `g0`.
pub fn merge_colored(
    g0: &BossGraph,
    g1: &BossGraph,
    m0: &ColorMatrix,
    m1: &ColorMatrix,
) -> Result<(BossGraph, ColorMatrix, MergeStats), MergeError> {
    m0.check_rows(g0.len())?;
    m1.check_rows(g1.len())?;
    let mut st = run_merge_plan(g0, g1, MergeMode::Plain)?;
    let mut sink = ColorSink { graph: GraphSink::new(), m0, m1, out: ColorMatrix::new(0, m0.cols() + m1.cols()) };
    build_union(g0, g1, &mut st, &mut sink)?;
    let g = sink.graph.finish(st.k, st.sigma)?;
    Ok((g, sink.out, st.stats()))
}

/// Folds [`merge`] over any number of graphs.
pub fn merge_many(graphs: &[BossGraph]) -> Result<BossGraph, MergeError> {
    let (first, rest) = graphs.split_first().ok_or(MergeError::Empty)?;
    rest.iter().try_fold(first.clone(), |acc, g| merge(&acc, g).map(|(m, _)| m))
}
