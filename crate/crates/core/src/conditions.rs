//! Condition LCR-hyper and Condition AB-hyper, the propagate relation and
//! witness checking.

use crate::error::{Error, Result};
use crate::flow;
use crate::hypergraph::{DirectedHypergraph, NodeId};
use crate::nodeset::NodeSet;
use crate::splitting::{enumerate_lambda, split, SplitCopy, SplitHypergraph, SplitSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    LcrHyper,
    AbHyper,
    LcrP2p,
    LcrLocal,
}

/// A partition of the node set of a (split) hypergraph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Partition {
    Lcr { l: NodeSet, c: NodeSet, r: NodeSet },
    Ab { a: NodeSet, b: NodeSet },
}

/// A concrete violation: fault set, split and partition of `V'`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub fault_set: NodeSet,
    pub split: SplitSpec,
    pub partition: Partition,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationStats {
    pub fault_sets: u64,
    pub split_graphs: u64,
    pub partitions: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub f: usize,
    pub holds: bool,
    pub witness: Option<Witness>,
    pub stats: EnumerationStats,
}

impl ConditionReport {
    fn new(condition: Condition, f: usize) -> Self {
        ConditionReport { condition, f, holds: true, witness: None, stats: EnumerationStats::default() }
    }

    fn violated(mut self, w: Witness) -> Self {
        self.holds = false;
        self.witness = Some(w);
        self
    }

    /// A short human-readable rendering.
    pub fn render(&self, g: &DirectedHypergraph) -> String {
        let mut out = format!(
            "condition: {:?}\nf: {}\nverdict: {}\nenumerated: {} fault sets, {} split hypergraphs, {} partitions\n",
            self.condition,
            self.f,
            if self.holds { "holds" } else { "violated" },
            self.stats.fault_sets,
            self.stats.split_graphs,
            self.stats.partitions
        );
        if let Some(w) = &self.witness {
            out.push_str(&format!("witness F = {}\n", w.fault_set));
            if !w.split.split_set.is_empty() {
                out.push_str("split:\n");
                let spec = crate::splitting::describe_spec(&w.split, |e| g.edge(e).map(|x| x.head));
                for line in spec.lines() {
                    out.push_str(&format!("  {line}\n"));
                }
                if let Ok(gp) = split(g, w.fault_set, &w.split) {
                    for v in gp.f_prime() - g.nodes() {
                        let c = if gp.copy_of(gp.origin(v), SplitCopy::Zero) == Some(v) { 0 } else { 1 };
                        out.push_str(&format!("  node {v} = copy {c} of {}\n", gp.origin(v)));
                    }
                }
            }
            match &w.partition {
                Partition::Lcr { l, c, r } => out.push_str(&format!("L = {l}\nC = {c}\nR = {r}\n")),
                Partition::Ab { a, b } => out.push_str(&format!("A = {a}\nB = {b}\n")),
            }
        }
        out
    }
}

fn check_budget(g: &DirectedHypergraph, f: usize) -> Result<()> {
    if f >= g.node_count() {
        return Err(Error::InvalidArgument(format!("fault budget f = {f} must be below the node count {}", g.node_count())));
    }
    Ok(())
}

/// Maximum number of node-disjoint `Uv`-paths in `G - excluded`.
pub fn count_disjoint_uv_paths(g: &DirectedHypergraph, u: NodeSet, v: NodeId, excluded: NodeSet) -> Result<usize> {
    if u.contains(v) || excluded.contains(v) || !u.is_disjoint(excluded) {
        return Err(Error::Overlap(format!("U = {u}, v = {v}, excluded = {excluded}")));
    }
    let d = g.underlying_graph();
    Ok(flow::disjoint_paths_into(d.out_sets(), g.nodes() - excluded, u, v, usize::MAX))
}

/// `B` is empty or every node of `B` has `f + 1` node-disjoint paths from
/// `A` in `G - excluded`.
pub fn propagates(g: &DirectedHypergraph, a: NodeSet, b: NodeSet, f: usize, excluded: NodeSet) -> Result<bool> {
    if !a.is_disjoint(b) || !a.is_disjoint(excluded) || !b.is_disjoint(excluded) {
        return Err(Error::Overlap(format!("A = {a}, B = {b}, excluded = {excluded}")));
    }
    let d = g.underlying_graph();
    let present = g.nodes() - excluded;
    Ok(b.iter().all(|v| flow::disjoint_paths_into(d.out_sets(), present, a, v, f + 1) > f))
}

/// Decides Condition LCR-hyper.
///
/// For each fault set `F` the search runs over partitions of `V - F` only.
/// Splitting every node of `F` is never worse for a violation: a hyperedge
/// of a node in `F` reaching only one side is put on the copy placed on
/// that side, and only hyperedges reaching both sides cost an in-neighbor
/// on one of them. The returned witness is built explicitly and satisfies
/// [`verify_witness`].
pub fn check_lcr_hyper(g: &DirectedHypergraph, f: usize) -> Result<ConditionReport> {
    check_budget(g, f)?;
    let mut report = ConditionReport::new(Condition::LcrHyper, f);
    for fs in g.nodes().subsets_up_to(f) {
        report.stats.fault_sets += 1;
        if let Some(w) = lcr_violation_for(g, fs, f, &mut report.stats) {
            return Ok(report.violated(w));
        }
    }
    Ok(report)
}

/// Condition LCR-hyper restricted to the single fault set `F`.
pub fn check_lcr_hyper_with_parameter(g: &DirectedHypergraph, fs: NodeSet, f: usize) -> Result<ConditionReport> {
    if !fs.is_subset(g.nodes()) {
        return Err(Error::InvalidArgument(format!("F = {fs} is not a subset of V")));
    }
    let mut report = ConditionReport::new(Condition::LcrHyper, f);
    report.stats.fault_sets = 1;
    Ok(match lcr_violation_for(g, fs, f, &mut report.stats) {
        Some(w) => report.violated(w),
        None => report,
    })
}

fn lcr_violation_for(g: &DirectedHypergraph, fs: NodeSet, f: usize, stats: &mut EnumerationStats) -> Option<Witness> {
    let rest = g.nodes() - fs;
    let mut found = None;
    for_each_ternary(rest, |lc, cc, rc| {
        if lc.is_empty() || rc.is_empty() {
            return true;
        }
        stats.partitions += 1;
        let (in_r, in_l) = (g.heads_into(rc), g.heads_into(lc));
        let base1 = ((lc | cc) & in_r).len();
        let base2 = ((rc | cc) & in_l).len();
        if base1 > f || base2 > f {
            return true;
        }
        let both: Vec<NodeId> = fs
            .iter()
            .filter(|&x| g.out_edges(x).any(|e| !e.tails.is_disjoint(rc) && !e.tails.is_disjoint(lc)))
            .collect();
        if base1 + base2 + both.len() > 2 * f {
            return true;
        }
        let on_left: NodeSet = both.iter().take((f - base1).min(both.len())).collect();
        found = Some(split_witness(g, fs, lc, cc, rc, on_left));
        false
    });
    found
}

/// Splits all of `fs`, placing copy 0 in `L` and copy 1 in `R`. Hyperedges
/// reaching both sides go to copy 0 exactly for the nodes in `on_left`.
fn split_witness(g: &DirectedHypergraph, fs: NodeSet, lc: NodeSet, cc: NodeSet, rc: NodeSet, on_left: NodeSet) -> Witness {
    let mut assignment = BTreeMap::new();
    for e in g.edges().iter().filter(|e| fs.contains(e.head)) {
        let (to_l, to_r) = (!e.tails.is_disjoint(lc), !e.tails.is_disjoint(rc));
        let copy = match (to_l, to_r) {
            (true, true) if on_left.contains(e.head) => SplitCopy::Zero,
            (true, true) => SplitCopy::One,
            (false, true) => SplitCopy::One,
            _ => SplitCopy::Zero,
        };
        assignment.insert(e.id, copy);
    }
    let spec = SplitSpec { split_set: fs, assignment };
    let gp = split(g, fs, &spec).expect("spec built from G");
    let zeros: NodeSet = fs.iter().map(|x| gp.member(x, SplitCopy::Zero)).collect();
    let ones: NodeSet = fs.iter().map(|x| gp.member(x, SplitCopy::One)).collect();
    Witness { fault_set: fs, split: spec, partition: Partition::Lcr { l: lc | zeros, c: cc, r: rc | ones } }
}

/// Calls `visit(L, C, R)` for every partition of `set`, following a base-3
/// counter over the sorted members (smallest id is the lowest digit,
/// digits 0/1/2 meaning L/C/R). Stops when `visit` returns `false`.
pub(crate) fn for_each_ternary(set: NodeSet, mut visit: impl FnMut(NodeSet, NodeSet, NodeSet) -> bool) {
    let members = set.to_vec();
    let mut digits = vec![0u8; members.len()];
    loop {
        let (mut l, mut c, mut r) = (NodeSet::empty(), NodeSet::empty(), NodeSet::empty());
        for (i, &v) in members.iter().enumerate() {
            match digits[i] {
                0 => l.insert(v),
                1 => c.insert(v),
                _ => r.insert(v),
            }
        }
        if !visit(l, c, r) {
            return;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return;
            }
            digits[i] += 1;
            if digits[i] < 3 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Condition LCR-hyper evaluated literally over every `G' ∈ Λ_F(G)` and
/// every partition of `V'`. Exponentially slower than [`check_lcr_hyper`];
/// kept as a reference.
pub fn check_lcr_hyper_exhaustive(g: &DirectedHypergraph, f: usize) -> Result<ConditionReport> {
    check_budget(g, f)?;
    let mut report = ConditionReport::new(Condition::LcrHyper, f);
    for fs in g.nodes().subsets_up_to(f) {
        report.stats.fault_sets += 1;
        for gp in enumerate_lambda(g, fs) {
            report.stats.split_graphs += 1;
            if let Some(partition) = lcr_literal(&gp, f, &mut report.stats) {
                return Ok(report.violated(Witness { fault_set: fs, split: gp.spec().clone(), partition }));
            }
        }
    }
    Ok(report)
}

fn lcr_literal(gp: &SplitHypergraph, f: usize, stats: &mut EnumerationStats) -> Option<Partition> {
    let h = gp.graph();
    let fp = gp.f_prime();
    let mut found = None;
    for_each_ternary(h.nodes(), |l, c, r| {
        let (lt, rt) = (l - fp, r - fp);
        if lt.is_empty() || rt.is_empty() {
            return true;
        }
        stats.partitions += 1;
        let n1 = (h.heads_into(rt) & (l | c)).len();
        let n2 = (h.heads_into(lt) & (r | c)).len();
        if n1 <= f && n2 <= f {
            found = Some(Partition::Lcr { l, c, r });
            return false;
        }
        true
    });
    found
}

/// Decides Condition AB-hyper over every `F`, every `G' ∈ Λ_F(G)` and every
/// 2-partition of `V'`.
pub fn check_ab_hyper(g: &DirectedHypergraph, f: usize) -> Result<ConditionReport> {
    check_budget(g, f)?;
    let mut report = ConditionReport::new(Condition::AbHyper, f);
    for fs in g.nodes().subsets_up_to(f) {
        report.stats.fault_sets += 1;
        if let Some(w) = ab_violation_for(g, fs, f, &mut report.stats) {
            return Ok(report.violated(w));
        }
    }
    Ok(report)
}

/// Condition AB-hyper restricted to the single fault set `F`.
pub fn check_ab_hyper_with_parameter(g: &DirectedHypergraph, fs: NodeSet, f: usize) -> Result<ConditionReport> {
    if !fs.is_subset(g.nodes()) {
        return Err(Error::InvalidArgument(format!("F = {fs} is not a subset of V")));
    }
    let mut report = ConditionReport::new(Condition::AbHyper, f);
    report.stats.fault_sets = 1;
    Ok(match ab_violation_for(g, fs, f, &mut report.stats) {
        Some(w) => report.violated(w),
        None => report,
    })
}

fn ab_violation_for(g: &DirectedHypergraph, fs: NodeSet, f: usize, stats: &mut EnumerationStats) -> Option<Witness> {
    for gp in enumerate_lambda(g, fs) {
        stats.split_graphs += 1;
        let mut oracle = CutOracle::new(&gp, f);
        let fp = gp.f_prime();
        let members = gp.graph().nodes().to_vec();
        for mask in 0u64..(1u64 << members.len()) {
            let b: NodeSet = members.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            let a = gp.graph().nodes() - b;
            if (a - fp).is_empty() || (b - fp).is_empty() {
                continue;
            }
            stats.partitions += 1;
            if !oracle.propagates(a, b - fp, b & fp) && !oracle.propagates(b, a - fp, a & fp) {
                return Some(Witness { fault_set: fs, split: gp.spec().clone(), partition: Partition::Ab { a, b } });
            }
        }
    }
    None
}

/// Propagation tests on one hypergraph through Menger's theorem: `A`
/// reaches `v` by `f + 1` disjoint paths in `G - X` iff no set `Z` of at
/// most `f` nodes other than `v` cuts every `A - Z` node off from `v` in
/// `G - X - Z`. Backward reachability sets are memoized per removed set.
struct CutOracle {
    n: usize,
    ids: Vec<NodeId>,
    in_adj: Vec<u64>,
    cuts: Vec<u64>,
    memo: Vec<u64>,
}

const UNKNOWN: u64 = u64::MAX;
/// Above this many nodes the reachability table would be too large.
const MEMO_LIMIT: usize = 16;

impl CutOracle {
    fn new(gp: &SplitHypergraph, f: usize) -> Self {
        let h = gp.graph();
        let ids = h.nodes().to_vec();
        let n = ids.len();
        let pos = |v: NodeId| ids.iter().position(|&x| x == v).expect("node of V'");
        let mut in_adj = vec![0u64; n];
        for e in h.edges() {
            let src = pos(e.head);
            for t in e.tails {
                in_adj[pos(t)] |= 1 << src;
            }
        }
        let cuts = NodeSet::full(n).subsets_up_to(f).into_iter().map(|s| s.bits()).collect();
        CutOracle { n, ids, in_adj, cuts, memo: if n <= MEMO_LIMIT { vec![UNKNOWN; n << n] } else { Vec::new() } }
    }

    fn compress(&self, s: NodeSet) -> u64 {
        self.ids.iter().enumerate().filter(|(_, &v)| s.contains(v)).fold(0, |m, (i, _)| m | 1 << i)
    }

    /// Positions that reach `v` in the graph without `removed`.
    fn back_reach(&mut self, v: usize, removed: u64) -> u64 {
        let slot = if self.n <= MEMO_LIMIT { (v << self.n) | removed as usize } else { usize::MAX };
        if let Some(&known) = self.memo.get(slot).filter(|&&m| m != UNKNOWN) {
            return known;
        }
        let mut seen = 1u64 << v;
        let mut frontier = seen;
        while frontier != 0 {
            let mut next = 0;
            let mut bits = frontier;
            while bits != 0 {
                let x = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                next |= self.in_adj[x];
            }
            frontier = next & !removed & !seen;
            seen |= frontier;
        }
        if let Some(m) = self.memo.get_mut(slot) {
            *m = seen;
        }
        seen
    }

    fn propagates(&mut self, a: NodeSet, b: NodeSet, excluded: NodeSet) -> bool {
        let (a, b, x) = (self.compress(a), self.compress(b), self.compress(excluded));
        let mut targets = b;
        while targets != 0 {
            let v = targets.trailing_zeros() as usize;
            targets &= targets - 1;
            for i in 0..self.cuts.len() {
                let z = self.cuts[i];
                if z & (x | 1 << v) != 0 {
                    continue;
                }
                if (a & !z) & self.back_reach(v, x | z) == 0 {
                    return false;
                }
            }
        }
        true
    }
}

/// Re-evaluates a witness against the raw definitions; `Ok(true)` iff it
/// shows a violation for `(G, f)`.
pub fn verify_witness(g: &DirectedHypergraph, f: usize, w: &Witness) -> Result<bool> {
    if !w.fault_set.is_subset(g.nodes()) {
        return Err(Error::MalformedWitness(format!("F = {} is not a subset of V", w.fault_set)));
    }
    if w.fault_set.len() > f {
        return Err(Error::MalformedWitness(format!("|F| = {} exceeds f = {f}", w.fault_set.len())));
    }
    let gp = split(g, w.fault_set, &w.split).map_err(|e| Error::MalformedWitness(e.to_string()))?;
    let h = gp.graph();
    let vp = h.nodes();
    let fp = gp.f_prime();
    let parts = match &w.partition {
        Partition::Lcr { l, c, r } => vec![*l, *c, *r],
        Partition::Ab { a, b } => vec![*a, *b],
    };
    let union = parts.iter().fold(NodeSet::empty(), |acc, &p| acc | p);
    let total: usize = parts.iter().map(|p| p.len()).sum();
    if union != vp || total != vp.len() {
        return Err(Error::MalformedWitness(format!("parts {parts:?} do not partition V' = {vp}")));
    }
    Ok(match w.partition {
        Partition::Lcr { l, c, r } => !h.adjacent(l | c, r - fp, f)? && !h.adjacent(r | c, l - fp, f)?,
        Partition::Ab { a, b } => !propagates(h, a, b - fp, f, b & fp)? && !propagates(h, b, a - fp, f, a & fp)?,
    })
}
