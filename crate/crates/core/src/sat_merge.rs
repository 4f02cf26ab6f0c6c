//! Deciding whether the union of two Wheeler automata admits a Wheeler order
//! compatible with both input orders, via a 2-SAT instance.
//!
//! Let `u_1 < … < u_n` be the non-source nodes of the first input and
//! `v_1 < … < v_m` those of the second. Variable `x(i, j)` means
//! `u_i < v_j`. The fused start state precedes everything and gets no
//! variable: `x(s, j)` is constant true and `x(i, s)` constant false.

use std::fmt::Write as _;

use thiserror::Error;

use crate::bitseq::Sym;
use crate::wheeler::{union_automaton, validate_wheeler, Nfa, Origin, WheelerError, WheelerViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error(transparent)]
    Wheeler(#[from] WheelerError),
    #[error("assignment does not satisfy the instance")]
    Unsatisfied,
    #[error("extracted order is not a Wheeler order: {0}")]
    Internal(WheelerViolation),
}

/// Literal: variable index and polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: usize) -> Self {
        Lit((var as u32) << 1)
    }

    pub fn neg(var: usize) -> Self {
        Lit(((var as u32) << 1) | 1)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_neg(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Self {
        Lit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        assignment[self.var()] != self.is_neg()
    }
}

/// Disjunction of two literals. A unit clause repeats its literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Clause(pub Lit, pub Lit);

impl Clause {
    pub fn implies(a: Lit, b: Lit) -> Self {
        Clause(a.negate(), b)
    }

    pub fn unit(a: Lit) -> Self {
        Clause(a, a)
    }

    pub fn eval(self, assignment: &[bool]) -> bool {
        self.0.eval(assignment) || self.1.eval(assignment)
    }
}

/// A 2-CNF formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TwoSat {
    vars: usize,
    clauses: Vec<Clause>,
}

impl TwoSat {
    pub fn new(vars: usize) -> Self {
        Self { vars, clauses: Vec::new() }
    }

    pub fn add(&mut self, c: Clause) {
        assert!(c.0.var() < self.vars && c.1.var() < self.vars);
        self.clauses.push(c);
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.eval(assignment))
    }

    /// Satisfying assignment or `None`, in time linear in the formula size.
    pub fn solve(&self) -> Option<Vec<bool>> {
        let nodes = 2 * self.vars;
        // implication graph in CSR form
        let mut degree = vec![0usize; nodes + 1];
        for c in &self.clauses {
            degree[c.0.negate().code()] += 1;
            degree[c.1.negate().code()] += 1;
        }
        let mut offsets = vec![0usize; nodes + 1];
        for v in 0..nodes {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[nodes]];
        for c in &self.clauses {
            for (from, to) in [(c.0.negate(), c.1), (c.1.negate(), c.0)] {
                targets[fill[from.code()]] = to.code();
                fill[from.code()] += 1;
            }
        }
        let comp = tarjan(nodes, &offsets, &targets);
        let mut assignment = vec![false; self.vars];
        for (v, value) in assignment.iter_mut().enumerate() {
            let (p, n) = (comp[Lit::pos(v).code()], comp[Lit::neg(v).code()]);
            if p == n {
                return None;
            }
            // components are numbered in reverse topological order
            *value = p < n;
        }
        Some(assignment)
    }

    /// DIMACS CNF text with 1-based variables.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.vars, self.clauses.len());
        let lit = |l: Lit| {
            let v = l.var() as i64 + 1;
            if l.is_neg() {
                -v
            } else {
                v
            }
        };
        for c in &self.clauses {
            let _ = writeln!(out, "{} {} 0", lit(c.0), lit(c.1));
        }
        out
    }
}

/// Strongly connected components; ids follow completion order.
fn tarjan(nodes: usize, offsets: &[usize], targets: &[usize]) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let mut index = vec![NONE; nodes];
    let mut low = vec![0usize; nodes];
    let mut on_stack = vec![false; nodes];
    let mut comp = vec![NONE; nodes];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut counter = 0;
    let mut comps = 0;
    for root in 0..nodes {
        if index[root] != NONE {
            continue;
        }
        call.push((root, offsets[root]));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            if *next < offsets[v + 1] {
                let w = targets[*next];
                *next += 1;
                if index[w] == NONE {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("component member on stack");
                        on_stack[w] = false;
                        comp[w] = comps;
                        if w == v {
                            break;
                        }
                    }
                    comps += 1;
                }
            }
        }
    }
    comp
}

/// Clause counts by family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClauseCounts {
    /// `x(i,j) ⇒ x(i,j+1)`, `x(i,j) ⇒ x(i-1,j)`, `¬x(i,j) ⇒ ¬x(i,j-1)`,
    /// `¬x(i,j) ⇒ ¬x(i+1,j)`.
    pub transitivity: [usize; 4],
    /// Cross pairs whose incoming labels differ.
    pub label_units: usize,
    /// Clauses from cross pairs of equally labelled edges.
    pub edge_pairs: usize,
}

/// The 2-SAT instance of a union automaton.
#[derive(Debug, Clone)]
pub struct SatInstance {
    /// Union ids of `u_1..u_n`.
    left: Vec<usize>,
    /// Union ids of `v_1..v_m`.
    right: Vec<usize>,
    formula: TwoSat,
    counts: ClauseCounts,
}

/// Endpoint of an edge in instance coordinates.
#[derive(Clone, Copy, PartialEq, Eq)]
enum End {
    Source,
    Node(usize),
}

impl SatInstance {
    pub fn left_len(&self) -> usize {
        self.left.len()
    }

    pub fn right_len(&self) -> usize {
        self.right.len()
    }

    /// Variable of `x(i, j)`, 1-based `i` and `j`.
    pub fn var(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.right.len() + (j - 1)
    }

    pub fn formula(&self) -> &TwoSat {
        &self.formula
    }

    pub fn counts(&self) -> ClauseCounts {
        self.counts
    }
}

/// Builds the clauses for a union automaton carrying origin tags.
pub fn build_instance(u: &Nfa) -> Result<SatInstance, SatError> {
    let origins = u.origins().ok_or(WheelerError::NoOrigins)?;
    let labels = u.incoming_labels()?;
    let mut sides: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
    let mut coord = vec![End::Source; u.node_count()];
    for (id, o) in origins.iter().enumerate() {
        if let Origin::Input { side, rank, .. } = *o {
            sides[side as usize].push((rank, id));
            coord[id] = End::Node(rank);
        }
    }
    for s in sides.iter_mut() {
        s.sort_unstable();
    }
    let left: Vec<usize> = sides[0].iter().map(|&(_, id)| id).collect();
    let right: Vec<usize> = sides[1].iter().map(|&(_, id)| id).collect();
    let (n, m) = (left.len(), right.len());
    let mut inst = SatInstance { left, right, formula: TwoSat::new(n * m), counts: ClauseCounts::default() };
    let x = |i: usize, j: usize| Lit::pos((i - 1) * m + (j - 1));

    for i in 1..=n {
        for j in 1..m {
            inst.formula.add(Clause::implies(x(i, j), x(i, j + 1)));
            inst.counts.transitivity[0] += 1;
        }
    }
    for i in 2..=n {
        for j in 1..=m {
            inst.formula.add(Clause::implies(x(i, j), x(i - 1, j)));
            inst.counts.transitivity[1] += 1;
        }
    }
    for i in 1..=n {
        for j in 2..=m {
            inst.formula.add(Clause::implies(x(i, j).negate(), x(i, j - 1).negate()));
            inst.counts.transitivity[2] += 1;
        }
    }
    for i in 1..n {
        for j in 1..=m {
            inst.formula.add(Clause::implies(x(i, j).negate(), x(i + 1, j).negate()));
            inst.counts.transitivity[3] += 1;
        }
    }

    for i in 1..=n {
        let a = labels[inst.left[i - 1]];
        for j in 1..=m {
            let b = labels[inst.right[j - 1]];
            if let (Some(a), Some(b)) = (a, b) {
                if a < b {
                    inst.formula.add(Clause::unit(x(i, j)));
                    inst.counts.label_units += 1;
                } else if a > b {
                    inst.formula.add(Clause::unit(x(i, j).negate()));
                    inst.counts.label_units += 1;
                }
            }
        }
    }

    // edges per side as (label, from, to) in instance coordinates
    let mut by_side: [Vec<(Sym, End, usize)>; 2] = [Vec::new(), Vec::new()];
    for e in u.edges() {
        if let (Origin::Input { side, .. }, End::Node(to)) = (origins[e.to], coord[e.to]) {
            by_side[side as usize].push((e.label, coord[e.from], to));
        }
    }
    for s in by_side.iter_mut() {
        s.sort_unstable_by_key(|&(c, _, _)| c);
    }
    let mut lo1 = 0;
    for (idx, &(c, from0, k)) in by_side[0].iter().enumerate() {
        if idx == 0 || by_side[0][idx - 1].0 != c {
            lo1 = by_side[1].partition_point(|e| e.0 < c);
        }
        for &(c1, from1, h) in &by_side[1][lo1..] {
            if c1 != c {
                break;
            }
            match (from0, from1) {
                (End::Source, End::Source) => {}
                (End::Source, End::Node(_)) => {
                    inst.formula.add(Clause::unit(x(k, h)));
                    inst.counts.edge_pairs += 1;
                }
                (End::Node(_), End::Source) => {
                    inst.formula.add(Clause::unit(x(k, h).negate()));
                    inst.counts.edge_pairs += 1;
                }
                (End::Node(i), End::Node(j)) => {
                    inst.formula.add(Clause::implies(x(i, j), x(k, h)));
                    inst.formula.add(Clause::implies(x(i, j).negate(), x(k, h).negate()));
                    inst.counts.edge_pairs += 2;
                }
            }
        }
    }
    Ok(inst)
}

/// Solves the instance's formula.
pub fn solve_2sat(inst: &SatInstance) -> Option<Vec<bool>> {
    inst.formula.solve()
}

/// Node order (union ids, smallest first) induced by a satisfying assignment.
pub fn extract_order(inst: &SatInstance, assignment: &[bool]) -> Result<Vec<usize>, SatError> {
    if !inst.formula.is_satisfied_by(assignment) {
        return Err(SatError::Unsatisfied);
    }
    let (n, m) = (inst.left.len(), inst.right.len());
    let mut order = Vec::with_capacity(n + m + 1);
    let source = (0..n + m + 1).find(|id| !inst.left.contains(id) && !inst.right.contains(id)).unwrap_or(0);
    order.push(source);
    let (mut i, mut j) = (1, 1);
    while i <= n || j <= m {
        let take_left = j > m || (i <= n && assignment[inst.var(i, j)]);
        if take_left {
            order.push(inst.left[i - 1]);
            i += 1;
        } else {
            order.push(inst.right[j - 1]);
            j += 1;
        }
    }
    Ok(order)
}

/// Result of the 2-SAT merge.
#[derive(Debug, Clone)]
pub enum SatOutcome {
    Sat { union: Nfa, order: Vec<usize>, counts: ClauseCounts },
    Unsat { union: Nfa, counts: ClauseCounts },
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat { .. })
    }
}

/// Builds the union of two Wheeler automata and searches for a compatible
/// Wheeler order of it.
pub fn sat_merge(a0: &Nfa, order0: &[usize], a1: &Nfa, order1: &[usize]) -> Result<SatOutcome, SatError> {
    let union = union_automaton(a0, order0, a1, order1)?;
    sat_merge_union(union)
}

/// [`sat_merge`] on an already built union automaton.
pub fn sat_merge_union(union: Nfa) -> Result<SatOutcome, SatError> {
    let inst = build_instance(&union)?;
    let counts = inst.counts();
    match solve_2sat(&inst) {
        None => Ok(SatOutcome::Unsat { union, counts }),
        Some(assignment) => {
            let order = extract_order(&inst, &assignment)?;
            validate_wheeler(&union, &order).map_err(SatError::Internal)?;
            Ok(SatOutcome::Sat { union, order, counts })
        }
    }
}
