//! Slow reference implementations and random instance generators.
//!
//! Everything here works from definitions: sorting, enumeration and
//! exhaustive search. Nothing calls into the merge or refinement code.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bitseq::{BitVec, RawBits, Sym, SENTINEL};
use crate::boss::{BossError, BossGraph};
use crate::color::ColorMatrix;
use crate::sat_merge::TwoSat;
use crate::wheeler::{validate_wheeler, Edge, Nfa, Origin};

/// Size limits for the exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest union automaton searched by [`exhaustive_corder`].
    pub interleave_nodes: usize,
    /// Largest automaton searched by [`exhaustive_wheeler_order`].
    pub permute_nodes: usize,
    /// Longest word produced by [`enumerate_language`].
    pub word_len: usize,
    /// Most variables accepted by [`brute_force_2sat`].
    pub sat_vars: usize,
}

pub const CAPS: Caps = Caps { interleave_nodes: 11, permute_nodes: 8, word_len: 12, sat_vars: 20 };

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for exhaustive search: {size} > {cap}")]
    TooLarge { size: usize, cap: usize },
    #[error("union automaton carries no origin tags")]
    NoOrigins,
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error(transparent)]
    Boss(#[from] BossError),
}

/// Graph with the given nodes (k-mers) and real edges `(k-mer, label)`.
fn boss_from_kmers(
    nodes: &BTreeSet<Vec<Sym>>,
    edges: &BTreeSet<(Vec<Sym>, Sym)>,
    k: usize,
    sigma: usize,
) -> Result<BossGraph, BossError> {
    // colex order = lexicographic order of the reversed k-mers
    let mut order: Vec<&Vec<Sym>> = nodes.iter().collect();
    order.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));

    let mut first_into: BTreeMap<Vec<Sym>, Vec<Sym>> = BTreeMap::new();
    for node in &order {
        for (_, c) in edges.range(((*node).clone(), 0)..=((*node).clone(), Sym::MAX)) {
            let mut dest = node[1..].to_vec();
            dest.push(*c);
            first_into.entry(dest).or_insert_with(|| (*node).clone());
        }
    }

    let mut w = Vec::new();
    let mut wminus = RawBits::with_capacity(0);
    let mut last = RawBits::with_capacity(0);
    for node in order {
        let labels: Vec<Sym> =
            edges.range((node.clone(), 0)..=(node.clone(), Sym::MAX)).map(|(_, c)| *c).collect();
        if labels.is_empty() {
            w.push(SENTINEL);
            wminus.push(false);
            last.push(true);
            continue;
        }
        for (t, &c) in labels.iter().enumerate() {
            let mut dest = node[1..].to_vec();
            dest.push(c);
            w.push(c);
            wminus.push(first_into.get(&dest) == Some(node));
            last.push(t + 1 == labels.len());
        }
    }
    BossGraph::from_parts(k, sigma, &w, BitVec::new(wminus), BitVec::new(last))
}

/// De Bruijn graph of order `k` built straight from the definition.
pub fn naive_boss(collection: &[Vec<Sym>], k: usize, sigma: usize) -> Result<BossGraph, BossError> {
    if collection.is_empty() {
        return Err(BossError::EmptyCollection);
    }
    if k == 0 {
        return Err(BossError::ZeroOrder);
    }
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for s in collection {
        if s.is_empty() {
            return Err(BossError::EmptyString { index: 0 });
        }
        let padded: Vec<Sym> = std::iter::repeat_n(SENTINEL, k).chain(s.iter().copied()).collect();
        for start in 0..=s.len() {
            let kmer = padded[start..start + k].to_vec();
            if start < s.len() {
                edges.insert((kmer.clone(), padded[start + k]));
            }
            nodes.insert(kmer);
        }
    }
    boss_from_kmers(&nodes, &edges, k, sigma)
}

fn kmer_sets(g: &BossGraph) -> (BTreeSet<Vec<Sym>>, BTreeSet<(Vec<Sym>, Sym)>) {
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    for v in 1..=g.node_count() {
        let kmer = g.node_kmer(v).expect("node in range");
        for c in g.out_labels(v).expect("node in range") {
            if c != SENTINEL {
                edges.insert((kmer.clone(), c));
            }
        }
        nodes.insert(kmer);
    }
    (nodes, edges)
}

/// Union of the k-mer and edge sets of two graphs, rebuilt by sorting.
pub fn naive_merge(g0: &BossGraph, g1: &BossGraph) -> Result<BossGraph, OracleError> {
    if g0.k() != g1.k() {
        return Err(OracleError::OrderMismatch(g0.k(), g1.k()));
    }
    let (mut nodes, mut edges) = kmer_sets(g0);
    let (n1, e1) = kmer_sets(g1);
    nodes.extend(n1);
    edges.extend(e1);
    Ok(boss_from_kmers(&nodes, &edges, g0.k(), g0.sigma().max(g1.sigma()))?)
}

/// Longest common suffix of each k-mer with its predecessor; entry 0 is 0.
pub fn brute_lcs(kmers: &[Vec<Sym>]) -> Vec<u16> {
    let mut out = Vec::with_capacity(kmers.len());
    for (i, kmer) in kmers.iter().enumerate() {
        if i == 0 {
            out.push(0);
            continue;
        }
        let prev = &kmers[i - 1];
        let n = prev.iter().rev().zip(kmer.iter().rev()).take_while(|(a, b)| a == b).count();
        out.push(n as u16);
    }
    out
}

/// Node k-mers of `g` in node order.
pub fn node_kmers(g: &BossGraph) -> Vec<Vec<Sym>> {
    (1..=g.node_count()).map(|v| g.node_kmer(v).expect("node in range")).collect()
}

fn entry_rows(g: &BossGraph) -> HashMap<(Vec<Sym>, Sym), usize> {
    let mut rows = HashMap::new();
    for pos in 1..=g.len() {
        let v = g.node_of(pos).expect("position in range");
        rows.insert((g.node_kmer(v).expect("node in range"), g.label(pos)), pos - 1);
    }
    rows
}

/// Color matrix of `merged` recomputed edge by edge: an entry carries the
/// colors of every input that contains the same `(k-mer, label)` entry.
pub fn recolor(
    g0: &BossGraph,
    g1: &BossGraph,
    m0: &ColorMatrix,
    m1: &ColorMatrix,
    merged: &BossGraph,
) -> ColorMatrix {
    let (r0, r1) = (entry_rows(g0), entry_rows(g1));
    let mut out = ColorMatrix::new(merged.len(), m0.cols() + m1.cols());
    for pos in 1..=merged.len() {
        let v = merged.node_of(pos).expect("position in range");
        let key = (merged.node_kmer(v).expect("node in range"), merged.label(pos));
        if let Some(&r) = r0.get(&key) {
            for c in 0..m0.cols() {
                out.set(pos - 1, c, m0.get(r, c));
            }
        }
        if let Some(&r) = r1.get(&key) {
            for c in 0..m1.cols() {
                out.set(pos - 1, m0.cols() + c, m1.get(r, c));
            }
        }
    }
    out
}

/// All accepted words of length at most `maxlen`.
pub fn enumerate_language(a: &Nfa, maxlen: usize) -> Result<BTreeSet<Vec<Sym>>, OracleError> {
    if maxlen > CAPS.word_len {
        return Err(OracleError::TooLarge { size: maxlen, cap: CAPS.word_len });
    }
    let sigma = a.sigma() as Sym;
    let mut words = BTreeSet::new();
    let mut frontier: Vec<(Vec<Sym>, BTreeSet<usize>)> = vec![(Vec::new(), BTreeSet::from([a.source()]))];
    for len in 0..=maxlen {
        let mut next = Vec::new();
        for (word, states) in frontier {
            if states.iter().any(|&q| a.is_final(q)) {
                words.insert(word.clone());
            }
            if len == maxlen {
                continue;
            }
            for c in 1..=sigma {
                let succ: BTreeSet<usize> = states
                    .iter()
                    .flat_map(|&q| a.out_edges(q).iter().filter(|e| e.label == c).map(|e| e.to))
                    .collect();
                if !succ.is_empty() {
                    let mut w = word.clone();
                    w.push(c);
                    next.push((w, succ));
                }
            }
        }
        frontier = next;
    }
    Ok(words)
}

fn origin_lists(u: &Nfa) -> Result<(usize, [Vec<usize>; 2]), OracleError> {
    let origins = u.origins().ok_or(OracleError::NoOrigins)?;
    let mut lists: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
    let mut source = u.source();
    for (id, o) in origins.iter().enumerate() {
        match *o {
            Origin::Source => source = id,
            Origin::Input { side, rank, .. } => lists[side as usize].push((rank, id)),
        }
    }
    let strip = |mut l: Vec<(usize, usize)>| {
        l.sort_unstable();
        l.into_iter().map(|(_, id)| id).collect::<Vec<_>>()
    };
    let [l0, l1] = lists;
    Ok((source, [strip(l0), strip(l1)]))
}

/// First Wheeler order of the union automaton `u` that keeps both inputs'
/// node orders, found by trying every interleaving.
pub fn exhaustive_corder(u: &Nfa) -> Result<Option<Vec<usize>>, OracleError> {
    if u.node_count() > CAPS.interleave_nodes {
        return Err(OracleError::TooLarge { size: u.node_count(), cap: CAPS.interleave_nodes });
    }
    let (source, [left, right]) = origin_lists(u)?;
    let mut order = vec![source];
    Ok(interleave(u, &left, &right, &mut order))
}

fn interleave(u: &Nfa, left: &[usize], right: &[usize], order: &mut Vec<usize>) -> Option<Vec<usize>> {
    if left.is_empty() && right.is_empty() {
        return validate_wheeler(u, order).is_ok().then(|| order.clone());
    }
    for (take, rest_l, rest_r) in [
        (left.first(), left.get(1..).unwrap_or(&[]), right),
        (right.first(), left, right.get(1..).unwrap_or(&[])),
    ] {
        if let Some(&v) = take {
            order.push(v);
            let found = interleave(u, rest_l, rest_r, order);
            order.pop();
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

/// Every interleaving-based Wheeler order of `u`.
pub fn all_corders(u: &Nfa) -> Result<Vec<Vec<usize>>, OracleError> {
    if u.node_count() > CAPS.interleave_nodes {
        return Err(OracleError::TooLarge { size: u.node_count(), cap: CAPS.interleave_nodes });
    }
    let (source, [left, right]) = origin_lists(u)?;
    let mut out = Vec::new();
    let total = left.len() + right.len();
    // bit i of mask set means position i takes the next right-side node
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != right.len() {
            continue;
        }
        let (mut i, mut j) = (0, 0);
        let mut order = vec![source];
        for p in 0..total {
            if mask >> p & 1 == 1 {
                order.push(right[j]);
                j += 1;
            } else {
                order.push(left[i]);
                i += 1;
            }
        }
        if validate_wheeler(u, &order).is_ok() {
            out.push(order);
        }
    }
    Ok(out)
}

/// Some Wheeler order of `a` with the source first, by trying every
/// permutation of the other nodes.
pub fn exhaustive_wheeler_order(a: &Nfa) -> Result<Option<Vec<usize>>, OracleError> {
    if a.node_count() > CAPS.permute_nodes {
        return Err(OracleError::TooLarge { size: a.node_count(), cap: CAPS.permute_nodes });
    }
    let mut rest: Vec<usize> = (0..a.node_count()).filter(|&v| v != a.source()).collect();
    Ok(permute(a, &mut rest, 0))
}

fn permute(a: &Nfa, rest: &mut Vec<usize>, at: usize) -> Option<Vec<usize>> {
    if at == rest.len() {
        let order: Vec<usize> = std::iter::once(a.source()).chain(rest.iter().copied()).collect();
        return validate_wheeler(a, &order).is_ok().then_some(order);
    }
    for i in at..rest.len() {
        rest.swap(at, i);
        if let Some(o) = permute(a, rest, at + 1) {
            return Some(o);
        }
        rest.swap(at, i);
    }
    None
}

/// Satisfying assignment by truth-table enumeration.
pub fn brute_force_2sat(f: &TwoSat) -> Option<Vec<bool>> {
    let vars = f.vars();
    assert!(vars <= CAPS.sat_vars, "{vars} variables exceeds the brute-force cap");
    (0u64..1 << vars).map(|m| (0..vars).map(|v| m >> v & 1 == 1).collect::<Vec<bool>>()).find(|a| f.is_satisfied_by(a))
}

/// Random string collection over `1..=sigma`.
pub fn random_collection<R: Rng>(rng: &mut R, sigma: usize, max_strings: usize, max_len: usize) -> Vec<Vec<Sym>> {
    let count = rng.gen_range(1..=max_strings);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            (0..len).map(|_| rng.gen_range(1..=sigma) as Sym).collect()
        })
        .collect()
}

/// Two collections with a shared order and alphabet. The second sometimes
/// reuses strings or substrings of the first so the graphs overlap.
pub fn random_collection_pair<R: Rng>(rng: &mut R) -> (Vec<Vec<Sym>>, Vec<Vec<Sym>>, usize, usize) {
    let sigma = rng.gen_range(2..=6);
    let k = rng.gen_range(2..=8);
    let c0 = random_collection(rng, sigma, 30, 25);
    let mut c1 = random_collection(rng, sigma, 30, 25);
    if rng.gen_bool(0.5) {
        for s in c1.iter_mut() {
            if rng.gen_bool(0.4) {
                let src = c0.choose(rng).expect("nonempty");
                let a = rng.gen_range(0..src.len());
                let b = rng.gen_range(a + 1..=src.len());
                *s = src[a..b].to_vec();
            }
        }
    }
    (c0, c1, k, sigma)
}

/// Random color matrix with at least one color per row.
pub fn random_color_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ColorMatrix {
    let mut m = ColorMatrix::new(rows, cols);
    for r in 0..rows {
        m.set(r, rng.gen_range(0..cols), true);
        for c in 0..cols {
            if rng.gen_bool(0.3) {
                m.set(r, c, true);
            }
        }
    }
    m
}

/// Trie of random words, ordered colexicographically. Leaves are final.
fn random_trie<R: Rng>(rng: &mut R, nodes: usize, sigma: usize) -> (Nfa, Vec<usize>) {
    // node 0 is the root; path[v] is the word spelled to v
    let mut path: Vec<Vec<Sym>> = vec![Vec::new()];
    let mut child: HashMap<(usize, Sym), usize> = HashMap::new();
    let mut edges = Vec::new();
    while path.len() < nodes {
        let mut v = 0;
        loop {
            let c = rng.gen_range(1..=sigma) as Sym;
            match child.get(&(v, c)) {
                Some(&w) if rng.gen_bool(0.7) => v = w,
                Some(_) => {}
                None => {
                    let w = path.len();
                    let mut p = path[v].clone();
                    p.push(c);
                    path.push(p);
                    child.insert((v, c), w);
                    edges.push(Edge::new(v, w, c));
                    break;
                }
            }
        }
    }
    let mut finals: Vec<usize> = (0..path.len()).filter(|&v| !child.keys().any(|&(u, _)| u == v)).collect();
    for v in 1..path.len() {
        if rng.gen_bool(0.2) {
            finals.push(v);
        }
    }
    let mut order: Vec<usize> = (0..path.len()).collect();
    order.sort_by(|&a, &b| path[a].iter().rev().cmp(path[b].iter().rev()));
    (Nfa::new(path.len(), 0, edges, finals).expect("ids in range"), order)
}

/// Small automaton with cycles; `None` when it has no Wheeler order.
fn random_cyclic<R: Rng>(rng: &mut R, nodes: usize, sigma: usize) -> Option<(Nfa, Vec<usize>)> {
    let labels: Vec<Sym> = (0..nodes).map(|_| rng.gen_range(1..=sigma) as Sym).collect();
    let mut edges = Vec::new();
    for v in 1..nodes {
        edges.push(Edge::new(rng.gen_range(0..v), v, labels[v]));
    }
    for _ in 0..rng.gen_range(0..=nodes) {
        let v = rng.gen_range(1..nodes);
        edges.push(Edge::new(rng.gen_range(0..nodes), v, labels[v]));
    }
    let mut finals: Vec<usize> = (1..nodes).filter(|_| rng.gen_bool(0.4)).collect();
    let a = Nfa::new(nodes, 0, edges.clone(), finals.clone()).ok()?;
    // nodes that cannot reach a final state become final
    let mut reach: Vec<bool> = (0..nodes).map(|v| a.is_final(v)).collect();
    loop {
        let mut changed = false;
        for e in a.edges() {
            if reach[e.to] && !reach[e.from] {
                reach[e.from] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    finals.extend((0..nodes).filter(|&v| !reach[v]));
    let a = Nfa::new(nodes, 0, edges, finals).ok()?;
    a.check_automaton().ok()?;
    let order = exhaustive_wheeler_order(&a).ok()??;
    Some((a, order))
}

/// Random Wheeler automaton with at most `max_nodes` nodes (at least 2) and
/// one of its Wheeler orders.
pub fn random_wheeler_automaton<R: Rng>(rng: &mut R, max_nodes: usize, sigma: usize) -> (Nfa, Vec<usize>) {
    let nodes = rng.gen_range(2..=max_nodes.max(2));
    if nodes >= 3 && rng.gen_bool(0.5) {
        for _ in 0..20 {
            if let Some(found) = random_cyclic(rng, nodes, sigma) {
                return found;
            }
        }
    }
    random_trie(rng, nodes, sigma)
}

/// Two Wheeler automata whose union has at most `max_union` nodes.
pub fn random_union_pair<R: Rng>(rng: &mut R, max_union: usize) -> ((Nfa, Vec<usize>), (Nfa, Vec<usize>)) {
    let sigma = rng.gen_range(1..=3);
    let n0 = rng.gen_range(2..=max_union.saturating_sub(1).max(2));
    let a0 = random_wheeler_automaton(rng, n0, sigma);
    let room = (max_union + 1).saturating_sub(a0.0.node_count()).max(2);
    let a1 = random_wheeler_automaton(rng, room, sigma);
    (a0, a1)
}

/// Seed from `WM_SEED`, or `default` when unset or unparsable.
pub fn seed_from_env(default: u64) -> u64 {
    std::env::var("WM_SEED").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}
