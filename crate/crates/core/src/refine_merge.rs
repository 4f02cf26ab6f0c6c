//! Merging two Wheeler automata by partition refinement.
//!
//! Nodes of both inputs are grouped into ordered sets. Each round splits
//! every set by the sets of its members' smallest and largest predecessors
//! until nothing changes, or stops early when two members cannot be ordered.
//!
//! A partition over `n0 + n1` nodes is stored as two bitvectors. `B` has a 1
//! at the last position of every set. `Z` holds 0 for a node of the first
//! input and 1 for a node of the second, zeros before ones inside each set.
//! The two start states form the first set, encoded as `01` in both.

use std::fmt;

use thiserror::Error;

use crate::bitseq::{BitVec, RawBits, Sym};
use crate::wheeler::{encode_wheeler, validate_wheeler, Edge, Nfa, Origin, WheelerError, WheelerGraph, WheelerViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RefineError {
    #[error(transparent)]
    Wheeler(#[from] WheelerError),
    #[error("node {rank} of input {side} has no incoming edge")]
    Unlabelled { side: u8, rank: usize },
    #[error("incoming labels of input {side} decrease at node {rank}")]
    LabelOrder { side: u8, rank: usize },
    #[error("the start state has no predecessors")]
    StartState,
    #[error("member {rank} of input {side} is out of range")]
    MemberRange { side: u8, rank: usize },
    #[error("partition is not a fixpoint")]
    NotFixpoint,
}

/// A node of one input: `side` 0 or 1, `rank` 1-based in that input's order
/// (rank 1 is the start state).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Member {
    pub side: u8,
    pub rank: usize,
}

impl Member {
    pub fn new(side: u8, rank: usize) -> Self {
        Self { side, rank }
    }
}

impl fmt::Display for Member {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.side, self.rank)
    }
}

/// Set indices of a node's smallest and largest predecessors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinmaxPair {
    pub lo: usize,
    pub hi: usize,
}

impl MinmaxPair {
    /// `self` may be placed before `other`.
    pub fn precedes(self, other: MinmaxPair) -> bool {
        self.hi <= other.lo
    }

    pub fn compatible(self, other: MinmaxPair) -> bool {
        self.precedes(other) || other.precedes(self)
    }
}

impl fmt::Display for MinmaxPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lo, self.hi)
    }
}

/// The two inputs in succinct form.
#[derive(Debug, Clone)]
pub struct UnionView {
    graphs: [WheelerGraph; 2],
}

impl UnionView {
    pub fn new(g0: WheelerGraph, g1: WheelerGraph) -> Self {
        Self { graphs: [g0, g1] }
    }

    /// Splits a union automaton with origin tags back into its two inputs.
    pub fn from_union(u: &Nfa) -> Result<Self, RefineError> {
        let origins = u.origins().ok_or(WheelerError::NoOrigins)?;
        // local id of every union node on its side; the start state is 0 on both
        let mut local = vec![0usize; u.node_count()];
        let mut sizes = [1usize, 1];
        for (id, o) in origins.iter().enumerate() {
            if let Origin::Input { side, rank, .. } = *o {
                local[id] = rank;
                sizes[side as usize] = sizes[side as usize].max(rank + 1);
            }
        }
        let side_of = |id: usize| match origins[id] {
            Origin::Source => None,
            Origin::Input { side, .. } => Some(side as usize),
        };
        let mut parts = Vec::with_capacity(2);
        for side in 0..2 {
            let edges: Vec<Edge> = u
                .edges()
                .iter()
                .filter(|e| side_of(e.to) == Some(side))
                .map(|e| Edge::new(local[e.from], local[e.to], e.label))
                .collect();
            let finals: Vec<usize> =
                (0..u.node_count()).filter(|&id| u.is_final(id) && side_of(id).is_none_or(|s| s == side)).map(|id| local[id]).collect();
            let a = Nfa::new(sizes[side], 0, edges, finals)?;
            let order: Vec<usize> = (0..sizes[side]).collect();
            parts.push(encode_wheeler(&a, &order)?);
        }
        let g1 = parts.pop().expect("two sides");
        let g0 = parts.pop().expect("two sides");
        Ok(Self::new(g0, g1))
    }

    pub fn graph(&self, side: u8) -> &WheelerGraph {
        &self.graphs[side as usize]
    }

    /// Node count of each input, start states included.
    pub fn sizes(&self) -> (usize, usize) {
        (self.graphs[0].node_count(), self.graphs[1].node_count())
    }

    /// Total node count `n0 + n1`, both start states counted.
    pub fn len(&self) -> usize {
        self.graphs[0].node_count() + self.graphs[1].node_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Id in the union automaton built by [`crate::wheeler::union_of_graphs`].
    pub fn union_id(&self, m: Member) -> usize {
        match (m.side, m.rank) {
            (_, 1) => 0,
            (0, r) => r - 1,
            (_, r) => self.graphs[0].node_count() - 1 + r - 1,
        }
    }
}

/// Ordered partition of the nodes of both inputs.
#[derive(Clone, PartialEq, Eq)]
pub struct Partition {
    b: BitVec,
    z: BitVec,
}

impl Partition {
    pub fn from_bits(b: BitVec, z: BitVec) -> Self {
        assert_eq!(b.len(), z.len());
        Self { b, z }
    }

    pub fn b(&self) -> &BitVec {
        &self.b
    }

    pub fn z(&self) -> &BitVec {
        &self.z
    }

    pub fn set_count(&self) -> usize {
        self.b.count_ones()
    }

    /// Set holding encoding position `pos`.
    pub fn set_at(&self, pos: usize) -> usize {
        self.b.rank1(pos - 1)
    }

    /// Encoding position of a member.
    pub fn position(&self, m: Member) -> usize {
        if m.side == 0 {
            self.z.select0(m.rank)
        } else {
            self.z.select1(m.rank)
        }
    }

    pub fn set_of(&self, m: Member) -> usize {
        self.set_at(self.position(m))
    }

    /// First and last encoding positions of set `i`.
    pub fn bounds(&self, i: usize) -> (usize, usize) {
        (self.b.select1(i) + 1, self.b.select1(i + 1))
    }

    pub fn members(&self, i: usize) -> Vec<Member> {
        let (start, end) = self.bounds(i);
        (start..=end)
            .map(|p| {
                if self.z.get(p) {
                    Member::new(1, self.z.rank1(p))
                } else {
                    Member::new(0, self.z.rank0(p))
                }
            })
            .collect()
    }

    pub fn sets(&self) -> Vec<Vec<Member>> {
        (0..self.set_count()).map(|i| self.members(i)).collect()
    }

    fn grouped(&self, bits: &BitVec) -> String {
        let mut out = String::with_capacity(bits.len() + self.set_count());
        for p in 1..=bits.len() {
            out.push(if bits.get(p) { '1' } else { '0' });
            if self.b.get(p) && p < bits.len() {
                out.push(' ');
            }
        }
        out
    }

    /// `B` with a space after every set.
    pub fn b_string(&self) -> String {
        self.grouped(&self.b)
    }

    /// `Z` with a space after every set.
    pub fn z_string(&self) -> String {
        self.grouped(&self.z)
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B = {}, Z = {}", self.b_string(), self.z_string())
    }
}

/// Partition by incoming label, start states first. Labels with no node are
/// skipped.
pub fn initial_partition(view: &UnionView) -> Result<Partition, RefineError> {
    let sigma = view.graphs[0].sigma().max(view.graphs[1].sigma());
    let mut counts = [vec![0usize; sigma + 1], vec![0usize; sigma + 1]];
    for side in 0..2u8 {
        let g = view.graph(side);
        let mut prev: Sym = 0;
        for rank in 2..=g.node_count() {
            let c = g.incoming_label(rank).ok_or(RefineError::Unlabelled { side, rank })?;
            if c < prev {
                return Err(RefineError::LabelOrder { side, rank });
            }
            prev = c;
            counts[side as usize][c as usize] += 1;
        }
    }
    let mut b = RawBits::with_capacity(view.len());
    let mut z = RawBits::with_capacity(view.len());
    for bit in [false, true] {
        b.push(bit);
        z.push(bit);
    }
    for c in 1..=sigma {
        push_run(&mut b, &mut z, counts[0][c], counts[1][c]);
    }
    Ok(Partition { b: b.into(), z: z.into() })
}

/// Appends a set of `zeros` first-input and `ones` second-input nodes.
fn push_run(b: &mut RawBits, z: &mut RawBits, zeros: usize, ones: usize) {
    let size = zeros + ones;
    for t in 0..size {
        b.push(t + 1 == size);
        z.push(t >= zeros);
    }
}

/// Minmax pair of a non-start node, computed from the succinct inputs.
pub fn minmax(view: &UnionView, part: &Partition, m: Member) -> Result<MinmaxPair, RefineError> {
    if m.side > 1 || m.rank == 0 || m.rank > view.graph(m.side).node_count() {
        return Err(RefineError::MemberRange { side: m.side, rank: m.rank });
    }
    if m.rank == 1 {
        return Err(RefineError::StartState);
    }
    let g = view.graph(m.side);
    let (lo, _) = g.backward_min(m.rank)?;
    let (hi, _) = g.backward_max(m.rank)?;
    Ok(MinmaxPair { lo: part.set_of(Member::new(m.side, lo)), hi: part.set_of(Member::new(m.side, hi)) })
}

/// Two members of one set whose pairs admit no order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conflict {
    pub set: usize,
    pub left: (Member, MinmaxPair),
    pub right: (Member, MinmaxPair),
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "set {}: {} {} and {} {} are incompatible",
            self.set, self.left.0, self.left.1, self.right.0, self.right.1
        )
    }
}

/// One refinement round.
pub fn refine_step(view: &UnionView, part: &Partition) -> Result<Result<Partition, Conflict>, RefineError> {
    let mut b = RawBits::with_capacity(view.len());
    let mut z = RawBits::with_capacity(view.len());
    Ok(refine_step_into(view, part, &mut b, &mut z)?.map(|()| Partition { b: b.into(), z: z.into() }))
}

fn refine_step_into(
    view: &UnionView,
    part: &Partition,
    b_out: &mut RawBits,
    z_out: &mut RawBits,
) -> Result<Result<(), Conflict>, RefineError> {
    for bit in [false, true] {
        b_out.push(bit);
        z_out.push(bit);
    }
    for set in 1..part.set_count() {
        let (start, end) = part.bounds(set);
        let zeros_before = part.z.rank0(start - 1);
        let ones_before = part.z.rank1(start - 1);
        let zeros = part.z.rank0(end) - zeros_before;
        let ones = part.z.rank1(end) - ones_before;
        // next unconsumed rank on each side and one past the last
        let mut next = [zeros_before + 1, ones_before + 1];
        let stop = [zeros_before + zeros + 1, ones_before + ones + 1];
        let mut head: [Option<MinmaxPair>; 2] = [None, None];
        let mut run: Option<(MinmaxPair, usize, usize)> = None;
        loop {
            for side in 0..2 {
                if head[side].is_none() && next[side] < stop[side] {
                    head[side] = Some(minmax(view, part, Member::new(side as u8, next[side]))?);
                }
            }
            let side = match (head[0], head[1]) {
                (None, None) => break,
                (Some(_), None) => 0,
                (None, Some(_)) => 1,
                (Some(p0), Some(p1)) => {
                    if p0.precedes(p1) {
                        0
                    } else if p1.precedes(p0) {
                        1
                    } else {
                        return Ok(Err(Conflict {
                            set,
                            left: (Member::new(0, next[0]), p0),
                            right: (Member::new(1, next[1]), p1),
                        }));
                    }
                }
            };
            let pair = head[side].take().expect("chosen side has a head");
            next[side] += 1;
            match &mut run {
                Some((p, a, b)) if *p == pair => {
                    if side == 0 {
                        *a += 1;
                    } else {
                        *b += 1;
                    }
                }
                _ => {
                    if let Some((_, a, b)) = run {
                        push_run(b_out, z_out, a, b);
                    }
                    run = Some((pair, (side == 0) as usize, (side == 1) as usize));
                }
            }
        }
        if let Some((_, a, b)) = run {
            push_run(b_out, z_out, a, b);
        }
    }
    Ok(Ok(()))
}

/// Scratch accounting for one refinement run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefineStats {
    /// Rounds run, the last unchanged round included.
    pub steps: usize,
    /// Peak bits held by the current and next `(B, Z)` pairs.
    pub scratch_bits: usize,
}

/// Outcome of [`refine_to_fixpoint`].
#[derive(Debug, Clone)]
pub enum Refined {
    Stable { partition: Partition, stats: RefineStats },
    NoOrder { conflict: Conflict, stats: RefineStats },
}

/// Refines the initial partition until it stops changing.
pub fn refine_to_fixpoint(view: &UnionView) -> Result<Refined, RefineError> {
    let mut part = initial_partition(view)?;
    let mut stats = RefineStats::default();
    loop {
        let mut b = RawBits::with_capacity(view.len());
        let mut z = RawBits::with_capacity(view.len());
        let step = refine_step_into(view, &part, &mut b, &mut z)?;
        stats.steps += 1;
        stats.scratch_bits = stats.scratch_bits.max(part.b.len() + part.z.len() + b.len() + z.len());
        if let Err(conflict) = step {
            return Ok(Refined::NoOrder { conflict, stats });
        }
        if b == *part.b.raw() && z == *part.z.raw() {
            return Ok(Refined::Stable { partition: part, stats });
        }
        part = Partition { b: b.into(), z: z.into() };
    }
}

/// Quotient automaton of a stable partition; node `i` is set `i`.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub nfa: Nfa,
    /// Wheeler order of `nfa`: the identity.
    pub order: Vec<usize>,
    /// Every set other than the start set is a single node.
    pub exact: bool,
}

/// Builds the quotient automaton; fails unless `part` is stable.
pub fn build_reduced(view: &UnionView, part: &Partition) -> Result<Reduced, RefineError> {
    match refine_step(view, part)? {
        Ok(next) if next == *part => {}
        _ => return Err(RefineError::NotFixpoint),
    }
    let k = part.set_count();
    let mut edges = Vec::new();
    let mut finals = Vec::new();
    for side in 0..2u8 {
        let g = view.graph(side);
        for v in 1..=g.node_count() {
            let from = part.set_of(Member::new(side, v));
            for (to, c) in g.successors(v)? {
                edges.push(Edge::new(from, part.set_of(Member::new(side, to)), c));
            }
            if g.is_final(v) {
                finals.push(from);
            }
        }
    }
    let nfa = Nfa::new(k, 0, edges, finals)?;
    let exact = (1..k).all(|i| {
        let (s, e) = part.bounds(i);
        s == e
    });
    Ok(Reduced { nfa, order: (0..k).collect(), exact })
}

/// Why no compatible Wheeler order exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NoOrderReason {
    /// Two members of one set have incompatible minmax pairs.
    Incompatible(Conflict),
    /// The stable partition orders two equally labelled edges crosswise.
    /// Sets only ever split in forced directions, so every compatible order
    /// of the union would contain the same crossing.
    Crossing(WheelerViolation),
}

impl fmt::Display for NoOrderReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoOrderReason::Incompatible(c) => c.fmt(f),
            NoOrderReason::Crossing(v) => write!(f, "stable partition has crossing edges: {v}"),
        }
    }
}

/// Result of [`refine_merge`].
#[derive(Debug, Clone)]
pub enum RefineOutcome {
    /// No Wheeler order of the union keeps both input orders.
    NoOrder { reason: NoOrderReason, stats: RefineStats },
    /// Every node ended in its own set; `order` lists union ids.
    Exact { order: Vec<usize>, reduced: Reduced, partition: Partition, stats: RefineStats },
    /// Some sets still hold several nodes; `reduced` is the quotient.
    Reduced { reduced: Reduced, partition: Partition, stats: RefineStats },
}

impl RefineOutcome {
    pub fn stats(&self) -> RefineStats {
        match self {
            RefineOutcome::NoOrder { stats, .. }
            | RefineOutcome::Exact { stats, .. }
            | RefineOutcome::Reduced { stats, .. } => *stats,
        }
    }

    pub fn reduced(&self) -> Option<&Reduced> {
        match self {
            RefineOutcome::NoOrder { .. } => None,
            RefineOutcome::Exact { reduced, .. } | RefineOutcome::Reduced { reduced, .. } => Some(reduced),
        }
    }
}

/// Merges two Wheeler automata, each under its stored node order.
pub fn refine_merge(g0: &WheelerGraph, g1: &WheelerGraph) -> Result<RefineOutcome, RefineError> {
    refine_view(&UnionView::new(g0.clone(), g1.clone()))
}

/// [`refine_merge`] on a prepared view.
pub fn refine_view(view: &UnionView) -> Result<RefineOutcome, RefineError> {
    let (partition, stats) = match refine_to_fixpoint(view)? {
        Refined::NoOrder { conflict, stats } => {
            return Ok(RefineOutcome::NoOrder { reason: NoOrderReason::Incompatible(conflict), stats })
        }
        Refined::Stable { partition, stats } => (partition, stats),
    };
    let reduced = build_reduced(view, &partition)?;
    // a pair ordered by `m = l'` can be reversed when the shared source set
    // splits later; no round revisits it, so check the quotient directly
    if let Err(v) = validate_wheeler(&reduced.nfa, &reduced.order) {
        return Ok(RefineOutcome::NoOrder { reason: NoOrderReason::Crossing(v), stats });
    }
    if !reduced.exact {
        return Ok(RefineOutcome::Reduced { reduced, partition, stats });
    }
    let mut order = vec![0];
    for i in 1..partition.set_count() {
        order.push(view.union_id(partition.members(i)[0]));
    }
    Ok(RefineOutcome::Exact { order, reduced, partition, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::wheeler::{union_automaton, validate_wheeler};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn view(a0: &Nfa, a1: &Nfa) -> UnionView {
        let o0: Vec<usize> = (0..a0.node_count()).collect();
        let o1: Vec<usize> = (0..a1.node_count()).collect();
        UnionView::new(encode_wheeler(a0, &o0).unwrap(), encode_wheeler(a1, &o1).unwrap())
    }

    fn chain(labels: &[Sym]) -> Nfa {
        let edges = labels.iter().enumerate().map(|(i, &c)| Edge::new(i, i + 1, c));
        Nfa::new(labels.len() + 1, 0, edges, [labels.len()]).unwrap()
    }

    #[test]
    fn single_symbol_chains_give_two_sets() {
        let v = view(&chain(&[1, 1]), &chain(&[1]));
        let p = initial_partition(&v).unwrap();
        assert_eq!(p.set_count(), 2);
        assert_eq!(p.b_string(), "01 001");
        assert_eq!(p.z_string(), "01 001");
    }

    #[test]
    fn only_start_predecessor_gives_zero_pair() {
        let v = view(&chain(&[1, 2]), &chain(&[1]));
        let p = initial_partition(&v).unwrap();
        assert_eq!(minmax(&v, &p, Member::new(0, 2)).unwrap(), MinmaxPair { lo: 0, hi: 0 });
        assert_eq!(minmax(&v, &p, Member::new(0, 3)).unwrap(), MinmaxPair { lo: 1, hi: 1 });
        assert_eq!(minmax(&v, &p, Member::new(1, 1)), Err(RefineError::StartState));
    }

    #[test]
    fn singletons_are_stable() {
        let v = view(&chain(&[1]), &chain(&[2]));
        match refine_to_fixpoint(&v).unwrap() {
            Refined::Stable { partition, stats } => {
                assert_eq!(stats.steps, 1);
                assert_eq!(partition.set_count(), 3);
                assert_eq!(stats.scratch_bits, 4 * v.len());
            }
            Refined::NoOrder { .. } => panic!("chains with distinct labels merge"),
        }
    }

    #[test]
    fn split_round_trips_through_the_union() {
        let a0 = chain(&[1, 2]);
        let a1 = chain(&[1, 3]);
        let u = union_automaton(&a0, &[0, 1, 2], &a1, &[0, 1, 2]).unwrap();
        let v = UnionView::from_union(&u).unwrap();
        let w = view(&a0, &a1);
        for side in 0..2 {
            assert_eq!(crate::wheeler::decode_wheeler(v.graph(side)), crate::wheeler::decode_wheeler(w.graph(side)));
        }
    }

    #[test]
    fn not_a_fixpoint() {
        let a0 = Nfa::new(3, 0, [Edge::new(0, 1, 1), Edge::new(1, 2, 1)], [2]).unwrap();
        let v = view(&a0, &chain(&[1]));
        let p = initial_partition(&v).unwrap();
        assert!(matches!(build_reduced(&v, &p), Err(RefineError::NotFixpoint)));
    }

    #[test]
    fn minmax_matches_adjacency_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let ((a0, o0), (a1, o1)) = oracle::random_union_pair(&mut rng, 9);
            let u = union_automaton(&a0, &o0, &a1, &o1).unwrap();
            let v = UnionView::from_union(&u).unwrap();
            let p = initial_partition(&v).unwrap();
            let origins = u.origins().unwrap();
            let member = |id: usize| match origins[id] {
                Origin::Source => Member::new(0, 1),
                Origin::Input { side, rank, .. } => Member::new(side, rank + 1),
            };
            for id in 1..u.node_count() {
                let sets: Vec<usize> =
                    u.edges().iter().filter(|e| e.to == id).map(|e| p.set_of(member(e.from))).collect();
                let want = MinmaxPair { lo: *sets.iter().min().unwrap(), hi: *sets.iter().max().unwrap() };
                assert_eq!(minmax(&v, &p, member(id)).unwrap(), want);
            }
        }
    }

    #[test]
    fn exact_order_is_wheeler_for_the_union() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let (mut exact, mut crossing) = (0, 0);
        for _ in 0..300 {
            let ((a0, o0), (a1, o1)) = oracle::random_union_pair(&mut rng, 9);
            let u = union_automaton(&a0, &o0, &a1, &o1).unwrap();
            let v = UnionView::from_union(&u).unwrap();
            match refine_view(&v).unwrap() {
                RefineOutcome::Exact { order, .. } => {
                    validate_wheeler(&u, &order).unwrap();
                    exact += 1;
                }
                RefineOutcome::NoOrder { reason: NoOrderReason::Crossing(_), .. } => {
                    assert_eq!(oracle::exhaustive_corder(&u).unwrap(), None);
                    crossing += 1;
                }
                _ => {}
            }
        }
        assert!(exact > 0 && crossing > 0);
    }
}

