//! Wheeler graphs and automata: adjacency form, the succinct `I/O/L/C′`
//! encoding, navigation, order validation and the union of two automata.
//!
//! The succinct form stores, for nodes `1..=n` in Wheeler order:
//!
//! * `I`: in-degrees in unary (`0^d 1` per node),
//! * `O`: out-degrees in unary,
//! * `L`: out-edge labels grouped by source, ascending within a source,
//! * `C′`: bit `1 + C[c]` set for each used symbol `c`, where `C[c]` counts
//!   edges with a smaller label.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::bitseq::{BitVec, RangeError, RawBits, Sym, SymSeq, SENTINEL};
use crate::boss::BossGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Sym,
}

impl Edge {
    pub fn new(from: usize, to: usize, label: Sym) -> Self {
        Self { from, to, label }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.from, self.to, self.label)
    }
}

/// Where a node of a union automaton came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// The fused start state.
    Source,
    /// Node `id` of input `side`, at position `rank` (1-based) among that
    /// input's non-source nodes in its Wheeler order.
    Input { side: u8, id: usize, rank: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WheelerError {
    #[error("node {node} out of range 0..{n}")]
    NodeRange { node: usize, n: usize },
    #[error("automaton has no nodes")]
    Empty,
    #[error("node {node} has incoming edges with different labels")]
    MixedLabels { node: usize },
    #[error("node {node} has no incoming edge")]
    NoIncoming { node: usize },
    #[error("not an automaton: {0}")]
    NotAutomaton(String),
    #[error("order does not start with the source node")]
    SourceNotFirst,
    #[error("automaton carries no origin tags")]
    NoOrigins,
    #[error("malformed encoding: {0}")]
    Malformed(String),
    #[error("label 0 is reserved")]
    ZeroLabel,
    #[error(transparent)]
    Violation(#[from] WheelerViolation),
    #[error(transparent)]
    Range(#[from] RangeError),
}

/// Why a node order is not a Wheeler order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WheelerViolation {
    #[error("order is not a permutation of the nodes")]
    NotPermutation,
    #[error("node {node} has in-degree 0 but follows node {after} with positive in-degree")]
    InDegreeOrder { node: usize, after: usize },
    #[error("edges {first} and {second}: smaller label does not reach a smaller node")]
    LabelOrder { first: Edge, second: Edge },
    #[error("edges {first} and {second}: same label, sources ordered but targets reversed")]
    SourceOrder { first: Edge, second: Edge },
}

/// Automaton in adjacency form. Edges are kept sorted by `(from, label, to)`
/// with duplicates removed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa {
    n: usize,
    source: usize,
    edges: Vec<Edge>,
    finals: Vec<bool>,
    origins: Option<Vec<Origin>>,
}

impl Nfa {
    pub fn new<E, F>(n: usize, source: usize, edges: E, finals: F) -> Result<Self, WheelerError>
    where
        E: IntoIterator<Item = Edge>,
        F: IntoIterator<Item = usize>,
    {
        if n == 0 {
            return Err(WheelerError::Empty);
        }
        if source >= n {
            return Err(WheelerError::NodeRange { node: source, n });
        }
        let mut list: Vec<Edge> = Vec::new();
        for e in edges {
            for node in [e.from, e.to] {
                if node >= n {
                    return Err(WheelerError::NodeRange { node, n });
                }
            }
            if e.label == SENTINEL {
                return Err(WheelerError::ZeroLabel);
            }
            list.push(e);
        }
        list.sort_unstable_by_key(|e| (e.from, e.label, e.to));
        list.dedup();
        let mut fin = vec![false; n];
        for f in finals {
            if f >= n {
                return Err(WheelerError::NodeRange { node: f, n });
            }
            fin[f] = true;
        }
        Ok(Self { n, source, edges: list, finals: fin, origins: None })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_final(&self, v: usize) -> bool {
        self.finals[v]
    }

    pub fn final_nodes(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.finals[v]).collect()
    }

    pub fn origins(&self) -> Option<&[Origin]> {
        self.origins.as_deref()
    }

    pub fn with_origins(mut self, origins: Vec<Origin>) -> Self {
        assert_eq!(origins.len(), self.n);
        self.origins = Some(origins);
        self
    }

    /// Largest label in use, 0 when there are no edges.
    pub fn sigma(&self) -> usize {
        self.edges.iter().map(|e| e.label as usize).max().unwrap_or(0)
    }

    pub fn out_edges(&self, u: usize) -> &[Edge] {
        let lo = self.edges.partition_point(|e| e.from < u);
        let hi = self.edges.partition_point(|e| e.from <= u);
        &self.edges[lo..hi]
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for e in &self.edges {
            d[e.to] += 1;
        }
        d
    }

    /// Label shared by all edges entering each node; `None` for in-degree 0.
    pub fn incoming_labels(&self) -> Result<Vec<Option<Sym>>, WheelerError> {
        let mut lab: Vec<Option<Sym>> = vec![None; self.n];
        for e in &self.edges {
            match lab[e.to] {
                None => lab[e.to] = Some(e.label),
                Some(c) if c != e.label => return Err(WheelerError::MixedLabels { node: e.to }),
                _ => {}
            }
        }
        Ok(lab)
    }

    fn reach(&self, starts: &[usize], forward: bool) -> Vec<bool> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for e in &self.edges {
            if forward {
                adj[e.from].push(e.to);
            } else {
                adj[e.to].push(e.from);
            }
        }
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in starts {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Shortest-path distance from the source to every node.
    pub fn distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[self.source] = Some(0);
        let mut queue = VecDeque::from([self.source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued nodes have a distance");
            for e in self.out_edges(u) {
                if dist[e.to].is_none() {
                    dist[e.to] = Some(d + 1);
                    queue.push_back(e.to);
                }
            }
        }
        dist
    }

    /// Checks that the source is the only in-degree-0 node and that every
    /// node is reachable from it and can reach a final state.
    pub fn check_automaton(&self) -> Result<(), WheelerError> {
        let indeg = self.in_degrees();
        if indeg[self.source] != 0 {
            return Err(WheelerError::NotAutomaton(format!("source {} has incoming edges", self.source)));
        }
        if let Some(v) = (0..self.n).find(|&v| v != self.source && indeg[v] == 0) {
            return Err(WheelerError::NotAutomaton(format!("node {v} has in-degree 0")));
        }
        let fwd = self.reach(&[self.source], true);
        if let Some(v) = fwd.iter().position(|&r| !r) {
            return Err(WheelerError::NotAutomaton(format!("node {v} is unreachable")));
        }
        let back = self.reach(&self.final_nodes(), false);
        if let Some(v) = back.iter().position(|&r| !r) {
            return Err(WheelerError::NotAutomaton(format!("node {v} cannot reach a final state")));
        }
        Ok(())
    }
}

fn ranks_of(n: usize, order: &[usize]) -> Result<Vec<usize>, WheelerViolation> {
    if order.len() != n {
        return Err(WheelerViolation::NotPermutation);
    }
    let mut rank = vec![usize::MAX; n];
    for (r, &v) in order.iter().enumerate() {
        if v >= n || rank[v] != usize::MAX {
            return Err(WheelerViolation::NotPermutation);
        }
        rank[v] = r;
    }
    Ok(rank)
}

/// Checks that `order` (node ids, smallest first) is a Wheeler order.
pub fn validate_wheeler(a: &Nfa, order: &[usize]) -> Result<(), WheelerViolation> {
    let rank = ranks_of(a.n, order)?;
    let indeg = a.in_degrees();
    let mut positive: Option<usize> = None;
    for &v in order {
        if indeg[v] == 0 {
            if let Some(after) = positive {
                return Err(WheelerViolation::InDegreeOrder { node: v, after });
            }
        } else if positive.is_none() {
            positive = Some(v);
        }
    }
    let mut edges: Vec<(Sym, usize, usize, Edge)> =
        a.edges.iter().map(|e| (e.label, rank[e.from], rank[e.to], *e)).collect();
    edges.sort_unstable();
    // largest target over all edges with a smaller label
    let mut prev_label_max: Option<(usize, Edge)> = None;
    let mut i = 0;
    while i < edges.len() {
        let label = edges[i].0;
        let mut j = i;
        while j < edges.len() && edges[j].0 == label {
            j += 1;
        }
        let group = &edges[i..j];
        let min = group.iter().min_by_key(|x| x.2).expect("nonempty");
        if let Some((mx, e)) = prev_label_max {
            if mx >= min.2 {
                return Err(WheelerViolation::LabelOrder { first: e, second: min.3 });
            }
        }
        // same label: targets of earlier sources must not exceed later ones
        let mut earlier_max: Option<(usize, Edge)> = None;
        let mut s = 0;
        while s < group.len() {
            let src = group[s].1;
            let mut t = s;
            while t < group.len() && group[t].1 == src {
                t += 1;
            }
            let first_target = &group[s];
            if let Some((mx, e)) = earlier_max {
                if mx > first_target.2 {
                    return Err(WheelerViolation::SourceOrder { first: e, second: first_target.3 });
                }
            }
            let last_target = &group[t - 1];
            if earlier_max.is_none_or(|(mx, _)| last_target.2 > mx) {
                earlier_max = Some((last_target.2, last_target.3));
            }
            s = t;
        }
        let max = group.iter().max_by_key(|x| x.2).expect("nonempty");
        if prev_label_max.is_none_or(|(mx, _)| max.2 > mx) {
            prev_label_max = Some((max.2, max.3));
        }
        i = j;
    }
    Ok(())
}

/// Steps of one backward navigation query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackwardTrace {
    /// Position in `I` of the chosen incoming edge.
    pub in_pos: usize,
    /// Rank of the edge label among used symbols.
    pub symbol_rank: usize,
    /// Rank of the edge among edges with that label.
    pub rank_in_symbol: usize,
    /// Position of the edge in `L`.
    pub label_pos: usize,
    /// Source node.
    pub node: usize,
    pub label: Sym,
}

/// Succinct Wheeler graph. Nodes are ranks `1..=n`; node 1 is the source.
#[derive(Clone, PartialEq, Eq)]
pub struct WheelerGraph {
    n: usize,
    sigma: usize,
    indeg: BitVec,
    outdeg: BitVec,
    labels: SymSeq,
    cprime: BitVec,
    finals: BitVec,
    /// Used symbols in increasing order; index = symbol rank - 1.
    used: Vec<Sym>,
}

impl fmt::Debug for WheelerGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WheelerGraph")
            .field("I", &self.indeg.to_string())
            .field("O", &self.outdeg.to_string())
            .field("L", &self.labels.to_vec())
            .field("C'", &self.cprime.to_string())
            .field("finals", &self.finals.to_string())
            .finish()
    }
}

impl WheelerGraph {
    /// Assembles a graph from its arrays, checking their mutual consistency.
    pub fn from_parts(
        indeg: BitVec,
        outdeg: BitVec,
        labels: SymSeq,
        cprime: BitVec,
        finals: BitVec,
    ) -> Result<Self, WheelerError> {
        let n = indeg.count_ones();
        let m = indeg.count_zeros();
        let bad = |msg: String| Err(WheelerError::Malformed(msg));
        if n == 0 {
            return bad("no nodes".into());
        }
        if outdeg.count_ones() != n || outdeg.count_zeros() != m {
            return bad(format!("O has {} ones and {} zeros, expected {n} and {m}", outdeg.count_ones(), outdeg.count_zeros()));
        }
        if labels.len() != m || cprime.len() != m {
            return bad(format!("L has {} and C' has {} entries, expected {m}", labels.len(), cprime.len()));
        }
        if finals.len() != n {
            return bad(format!("finals has {} entries, expected {n}", finals.len()));
        }
        if !indeg.get(indeg.len()) || !outdeg.get(outdeg.len()) {
            return bad("I and O must end with 1".into());
        }
        let mut counts = vec![0usize; labels.sigma() + 1];
        for c in labels.iter() {
            if c == SENTINEL {
                return bad("L contains the sentinel".into());
            }
            counts[c as usize] += 1;
        }
        let used: Vec<Sym> = (1..counts.len()).filter(|&c| counts[c] > 0).map(|c| c as Sym).collect();
        let mut expect = RawBits::zeros(m);
        let mut acc = 0;
        for &c in &used {
            expect.set(acc, true);
            acc += counts[c as usize];
        }
        if *cprime.raw() != expect {
            return bad("C' does not match the label counts of L".into());
        }
        let sigma = labels.sigma();
        Ok(Self { n, sigma, indeg, outdeg, labels, cprime, finals, used })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.labels.len()
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn source(&self) -> usize {
        1
    }

    pub fn in_bits(&self) -> &BitVec {
        &self.indeg
    }

    pub fn out_bits(&self) -> &BitVec {
        &self.outdeg
    }

    pub fn labels(&self) -> &SymSeq {
        &self.labels
    }

    pub fn cprime(&self) -> &BitVec {
        &self.cprime
    }

    pub fn finals(&self) -> &BitVec {
        &self.finals
    }

    pub fn is_final(&self, v: usize) -> bool {
        self.finals.get(v)
    }

    fn check_node(&self, v: usize) -> Result<(), WheelerError> {
        if v == 0 || v > self.n {
            return Err(WheelerError::NodeRange { node: v, n: self.n + 1 });
        }
        Ok(())
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.indeg.select1(v) - self.indeg.select1(v - 1) - 1
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.outdeg.select1(v) - self.outdeg.select1(v - 1) - 1
    }

    /// Label of the edges entering `v`, `None` for in-degree 0.
    pub fn incoming_label(&self, v: usize) -> Option<Sym> {
        if self.in_degree(v) == 0 {
            return None;
        }
        let edge = self.indeg.rank0(self.indeg.select1(v - 1) + 1);
        Some(self.used[self.cprime.rank1(edge) - 1])
    }

    fn backward_at(&self, in_pos: usize) -> BackwardTrace {
        let edge = self.indeg.rank0(in_pos);
        let symbol_rank = self.cprime.rank1(edge);
        let rank_in_symbol = 1 + edge - self.cprime.select1(symbol_rank);
        let label = self.used[symbol_rank - 1];
        let label_pos = self.labels.select_c(label, rank_in_symbol);
        let node = 1 + self.outdeg.rank1(self.outdeg.select0(label_pos));
        BackwardTrace { in_pos, symbol_rank, rank_in_symbol, label_pos, node, label }
    }

    /// Smallest predecessor of `v`, with every intermediate value.
    pub fn backward_min_trace(&self, v: usize) -> Result<BackwardTrace, WheelerError> {
        self.check_node(v)?;
        if self.in_degree(v) == 0 {
            return Err(WheelerError::NoIncoming { node: v });
        }
        Ok(self.backward_at(1 + self.indeg.select1(v - 1)))
    }

    /// Largest predecessor of `v`, with every intermediate value.
    pub fn backward_max_trace(&self, v: usize) -> Result<BackwardTrace, WheelerError> {
        self.check_node(v)?;
        if self.in_degree(v) == 0 {
            return Err(WheelerError::NoIncoming { node: v });
        }
        Ok(self.backward_at(self.indeg.select1(v) - 1))
    }

    /// Smallest `u` with an edge `(u, v)`, and that edge's label.
    pub fn backward_min(&self, v: usize) -> Result<(usize, Sym), WheelerError> {
        self.backward_min_trace(v).map(|t| (t.node, t.label))
    }

    /// Largest `u` with an edge `(u, v)`, and that edge's label.
    pub fn backward_max(&self, v: usize) -> Result<(usize, Sym), WheelerError> {
        self.backward_max_trace(v).map(|t| (t.node, t.label))
    }

    /// Target of the edge stored at `L` position `pos`.
    fn target_of(&self, pos: usize) -> usize {
        let c = self.labels.get(pos);
        let r = self.labels.rank_c(c, pos);
        let symbol_rank = self.used.binary_search(&c).expect("label is used") + 1;
        let before = self.cprime.select1(symbol_rank) - 1;
        1 + self.indeg.rank1(self.indeg.select0(before + r))
    }

    /// Out-edges of `v` as `(target, label)`, ascending.
    pub fn successors(&self, v: usize) -> Result<Vec<(usize, Sym)>, WheelerError> {
        self.check_node(v)?;
        let first = self.outdeg.rank0(self.outdeg.select1(v - 1)) + 1;
        Ok((first..first + self.out_degree(v)).map(|p| (self.target_of(p), self.labels.get(p))).collect())
    }

    /// Source node of the edge stored at `L` position `pos`.
    fn source_of(&self, pos: usize) -> usize {
        1 + self.outdeg.rank1(self.outdeg.select0(pos))
    }
}

/// Encodes `a` with nodes ranked by `order` (node ids, smallest first).
pub fn encode_wheeler(a: &Nfa, order: &[usize]) -> Result<WheelerGraph, WheelerError> {
    validate_wheeler(a, order)?;
    let rank = ranks_of(a.n, order)?;
    let indeg = a.in_degrees();
    let mut i_bits = RawBits::with_capacity(a.n + a.edges.len());
    let mut o_bits = RawBits::with_capacity(a.n + a.edges.len());
    let mut labels = Vec::with_capacity(a.edges.len());
    let mut counts = vec![0usize; a.sigma() + 1];
    for &v in order {
        for _ in 0..indeg[v] {
            i_bits.push(false);
        }
        i_bits.push(true);
        let mut out: Vec<(Sym, usize)> = a.out_edges(v).iter().map(|e| (e.label, rank[e.to])).collect();
        out.sort_unstable();
        for (c, _) in out {
            o_bits.push(false);
            labels.push(c);
            counts[c as usize] += 1;
        }
        o_bits.push(true);
    }
    let mut cprime = RawBits::zeros(labels.len());
    let mut acc = 0;
    for &count in counts.iter().skip(1) {
        if count > 0 {
            cprime.set(acc, true);
            acc += count;
        }
    }
    let finals: RawBits = order.iter().map(|&v| a.finals[v]).collect();
    WheelerGraph::from_parts(
        i_bits.into(),
        o_bits.into(),
        SymSeq::new(&labels, a.sigma().max(1))?,
        cprime.into(),
        finals.into(),
    )
}

/// Adjacency form of `g`; node id `r - 1` stands for rank `r`.
pub fn decode_wheeler(g: &WheelerGraph) -> Nfa {
    let edges: Vec<Edge> = (1..=g.edge_count())
        .map(|p| Edge::new(g.source_of(p) - 1, g.target_of(p) - 1, g.labels.get(p)))
        .collect();
    let finals = (1..=g.n).filter(|&v| g.is_final(v)).map(|v| v - 1);
    Nfa::new(g.n, 0, edges, finals).expect("decoded ids are in range")
}

/// De Bruijn graph as an automaton: ids are node ranks minus one, every node
/// is final and `$` markers are dropped.
pub fn boss_to_nfa(g: &BossGraph) -> Nfa {
    let mut edges = Vec::with_capacity(g.len());
    for pos in 1..=g.len() {
        let c = g.label(pos);
        if c != SENTINEL {
            let from = g.node_of(pos).expect("position in range");
            let to = g.edge_target(pos).expect("real edge");
            edges.push(Edge::new(from - 1, to - 1, c));
        }
    }
    Nfa::new(g.node_count(), 0, edges, 0..g.node_count()).expect("graph ids are in range")
}

/// Wheeler encoding of a de Bruijn graph under its colex node order.
pub fn boss_to_wheeler(g: &BossGraph) -> WheelerGraph {
    let a = boss_to_nfa(g);
    let order: Vec<usize> = (0..a.n).collect();
    encode_wheeler(&a, &order).expect("colex order is a Wheeler order")
}

/// Fuses the start states of two Wheeler automata.
///
/// Node 0 of the result is the fused start state, followed by the non-source
/// nodes of `a0` in `order0` order and then those of `a1` in `order1` order.
pub fn union_automaton(a0: &Nfa, order0: &[usize], a1: &Nfa, order1: &[usize]) -> Result<Nfa, WheelerError> {
    validate_wheeler(a0, order0)?;
    validate_wheeler(a1, order1)?;
    if order0[0] != a0.source || order1[0] != a1.source {
        return Err(WheelerError::SourceNotFirst);
    }
    let n = a0.n + a1.n - 1;
    let mut id_map = [vec![0usize; a0.n], vec![0usize; a1.n]];
    let mut origins = vec![Origin::Source];
    let mut finals = Vec::new();
    if a0.finals[a0.source] || a1.finals[a1.source] {
        finals.push(0);
    }
    for (side, (a, order)) in [(a0, order0), (a1, order1)].into_iter().enumerate() {
        for (r, &v) in order.iter().enumerate().skip(1) {
            let id = origins.len();
            id_map[side][v] = id;
            origins.push(Origin::Input { side: side as u8, id: v, rank: r });
            if a.finals[v] {
                finals.push(id);
            }
        }
    }
    let mut edges = Vec::with_capacity(a0.edges.len() + a1.edges.len());
    for (side, a) in [a0, a1].into_iter().enumerate() {
        for e in &a.edges {
            edges.push(Edge::new(id_map[side][e.from], id_map[side][e.to], e.label));
        }
    }
    Ok(Nfa::new(n, 0, edges, finals)?.with_origins(origins))
}

/// Union of two succinct automata, each under its own stored order.
pub fn union_of_graphs(g0: &WheelerGraph, g1: &WheelerGraph) -> Result<Nfa, WheelerError> {
    let (a0, a1) = (decode_wheeler(g0), decode_wheeler(g1));
    let o0: Vec<usize> = (0..a0.n).collect();
    let o1: Vec<usize> = (0..a1.n).collect();
    union_automaton(&a0, &o0, &a1, &o1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boss::build_boss;
    use crate::Alphabet;

    /// A graph consistent with the navigation example: 8 nodes, labels
    /// a = 1, b = 2, c = 3.
    fn nav_fixture() -> Nfa {
        let e = |u: usize, v: usize, c: Sym| Edge::new(u - 1, v - 1, c);
        let edges = [
            e(1, 2, 1),
            e(1, 3, 1),
            e(2, 4, 1),
            e(3, 4, 1),
            e(6, 4, 1),
            e(1, 5, 2),
            e(4, 6, 2),
            e(7, 6, 2),
            e(5, 7, 3),
            e(6, 8, 3),
            e(8, 8, 3),
        ];
        Nfa::new(8, 0, edges, [7]).unwrap()
    }

    #[test]
    fn nav_fixture_arrays() {
        let a = nav_fixture();
        let g = encode_wheeler(&a, &(0..8).collect::<Vec<_>>()).unwrap();
        assert_eq!(g.in_bits().to_string(), "1010100010100101001");
        assert_eq!(g.out_bits().to_string(), "0001010101010010101");
        assert_eq!(g.labels().to_vec(), vec![1, 1, 2, 1, 1, 2, 3, 1, 3, 2, 3]);
        assert_eq!(g.cprime().to_string(), "10000100100");
    }

    #[test]
    fn backward_min_walkthrough() {
        let a = nav_fixture();
        let g = encode_wheeler(&a, &(0..8).collect::<Vec<_>>()).unwrap();
        let t = g.backward_min_trace(5).unwrap();
        assert_eq!((t.in_pos, t.symbol_rank, t.rank_in_symbol, t.label_pos), (10, 2, 1, 3));
        assert_eq!((t.node, t.label), (1, 2));
        assert!(matches!(g.backward_min(1), Err(WheelerError::NoIncoming { node: 1 })));
    }

    #[test]
    fn navigation_matches_adjacency() {
        let a = nav_fixture();
        let g = encode_wheeler(&a, &(0..8).collect::<Vec<_>>()).unwrap();
        for v in 1..=8 {
            let preds: Vec<&Edge> = a.edges().iter().filter(|e| e.to == v - 1).collect();
            if preds.is_empty() {
                continue;
            }
            let min = preds.iter().map(|e| e.from).min().unwrap() + 1;
            let max = preds.iter().map(|e| e.from).max().unwrap() + 1;
            assert_eq!(g.backward_min(v).unwrap().0, min);
            assert_eq!(g.backward_max(v).unwrap().0, max);
            assert_eq!(g.incoming_label(v), Some(preds[0].label));
            let mut succ: Vec<(usize, Sym)> = a.out_edges(v - 1).iter().map(|e| (e.to + 1, e.label)).collect();
            succ.sort_by_key(|&(t, c)| (c, t));
            assert_eq!(g.successors(v).unwrap(), succ);
        }
        assert_eq!(decode_wheeler(&g), a);
    }

    #[test]
    fn single_node() {
        let a = Nfa::new(1, 0, [], [0]).unwrap();
        let g = encode_wheeler(&a, &[0]).unwrap();
        assert_eq!(g.in_bits().to_string(), "1");
        assert_eq!(g.out_bits().to_string(), "1");
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.cprime().len(), 0);
        assert_eq!(decode_wheeler(&g), a);
    }

    #[test]
    fn rejects_bad_orders() {
        let a = nav_fixture();
        let mut order: Vec<usize> = (0..8).collect();
        order.swap(1, 2);
        // nodes 2 and 3 are both reached from node 1 by a, swapping them is fine
        assert!(validate_wheeler(&a, &order).is_ok());
        order.swap(0, 1);
        assert!(matches!(validate_wheeler(&a, &order), Err(WheelerViolation::InDegreeOrder { .. })));
        let mut order: Vec<usize> = (0..8).collect();
        order.swap(3, 4);
        assert!(matches!(validate_wheeler(&a, &order), Err(WheelerViolation::LabelOrder { .. })));
        let mut order: Vec<usize> = (0..8).collect();
        order.swap(5, 6);
        assert!(validate_wheeler(&a, &order).is_err());
        assert_eq!(validate_wheeler(&a, &[0, 1]), Err(WheelerViolation::NotPermutation));
        assert!(encode_wheeler(&a, &order).is_err());
    }

    #[test]
    fn same_label_crossing_is_reported() {
        // 0 -a-> 1, 0 -a-> 2, 1 -b-> 4, 2 -b-> 3 : swapping targets of b crosses
        let a = Nfa::new(
            5,
            0,
            [Edge::new(0, 1, 1), Edge::new(0, 2, 1), Edge::new(1, 4, 2), Edge::new(2, 3, 2)],
            [3, 4],
        )
        .unwrap();
        assert!(matches!(validate_wheeler(&a, &[0, 1, 2, 3, 4]), Err(WheelerViolation::SourceOrder { .. })));
        assert!(validate_wheeler(&a, &[0, 1, 2, 4, 3]).is_ok());
    }

    #[test]
    fn boss_graph_is_wheeler() {
        let al = Alphabet::dna();
        let c: Vec<Vec<Sym>> = ["TACACT", "TACTCG", "GACTCA"].iter().map(|s| al.encode(s).unwrap()).collect();
        let g = build_boss(&c, 3, 4).unwrap();
        let w = boss_to_wheeler(&g);
        assert_eq!(w.node_count(), g.node_count());
        let a = boss_to_nfa(&g);
        assert!(validate_wheeler(&a, &(0..a.node_count()).collect::<Vec<_>>()).is_ok());
        for v in 2..=w.node_count() {
            let (u, c) = w.backward_min(v).unwrap();
            let (pos, c2) = g.incoming(v).unwrap().unwrap();
            assert_eq!(c, c2);
            assert_eq!(u, g.node_of(pos).unwrap());
        }
    }

    #[test]
    fn union_fuses_sources() {
        let a0 = Nfa::new(2, 0, [Edge::new(0, 1, 1), Edge::new(1, 1, 1)], [1]).unwrap();
        let a1 = Nfa::new(3, 0, [Edge::new(0, 1, 1), Edge::new(1, 1, 1), Edge::new(1, 2, 2)], [2]).unwrap();
        let u = union_automaton(&a0, &[0, 1], &a1, &[0, 1, 2]).unwrap();
        assert_eq!(u.node_count(), 4);
        assert_eq!(u.final_nodes(), vec![1, 3]);
        assert_eq!(u.origins().unwrap()[2], Origin::Input { side: 1, id: 1, rank: 1 });
        assert!(u.check_automaton().is_ok());
        assert!(u.incoming_labels().is_ok());
    }

    #[test]
    fn automaton_checks() {
        let a = Nfa::new(3, 0, [Edge::new(0, 1, 1)], [1]).unwrap();
        assert!(matches!(a.check_automaton(), Err(WheelerError::NotAutomaton(_))));
        let b = Nfa::new(2, 0, [Edge::new(0, 1, 1), Edge::new(1, 1, 2)], [1]).unwrap();
        assert_eq!(b.incoming_labels(), Err(WheelerError::MixedLabels { node: 1 }));
        assert_eq!(Nfa::new(2, 0, [Edge::new(0, 2, 1)], []), Err(WheelerError::NodeRange { node: 2, n: 2 }));
    }
}
