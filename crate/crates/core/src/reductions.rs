//! Tight conditions for the classical special cases and cross-validation
//! against the general checker.
//!
//! * point-to-point: every hyperedge has one tail;
//! * local broadcast: every node heads exactly one hyperedge;
//! * undirected hypergraphs: every member of a hyperedge may act as head.

use crate::conditions::{check_lcr_hyper, for_each_ternary, Condition, ConditionReport, EnumerationStats, Partition, Witness};
use crate::error::{Error, Result};
use crate::flow;
use crate::hypergraph::{Classification, DirectedHypergraph, NodeId, SimpleDigraph};
use crate::nodeset::NodeSet;
use crate::splitting::SplitSpec;
use serde::{Deserialize, Serialize};

fn heads_into(d: &SimpleDigraph, b: NodeSet) -> NodeSet {
    d.nodes().iter().filter(|&u| !d.out_neighbors(u).is_disjoint(b)).collect()
}

fn lcr_report(condition: Condition, f: usize) -> ConditionReport {
    ConditionReport { condition, f, holds: true, witness: None, stats: EnumerationStats::default() }
}

fn violation(mut r: ConditionReport, fs: NodeSet, l: NodeSet, c: NodeSet, rr: NodeSet) -> ConditionReport {
    r.holds = false;
    r.witness = Some(Witness { fault_set: fs, split: SplitSpec::none(), partition: Partition::Lcr { l, c, r: rr } });
    r
}

/// Condition LCR-p2p: for every `F` and every partition `(L, C, R)` of
/// `V - F`, `R ∪ C` is adjacent to `L` or `L ∪ C` is adjacent to `R`.
pub fn check_lcr_p2p(d: &SimpleDigraph, f: usize) -> ConditionReport {
    let mut report = lcr_report(Condition::LcrP2p, f);
    for fs in d.nodes().subsets_up_to(f) {
        report.stats.fault_sets += 1;
        let mut found = None;
        for_each_ternary(d.nodes() - fs, |l, c, r| {
            if l.is_empty() || r.is_empty() {
                return true;
            }
            report.stats.partitions += 1;
            let into_l = (heads_into(d, l) & (r | c)).len();
            let into_r = (heads_into(d, r) & (l | c)).len();
            if into_l <= f && into_r <= f {
                found = Some((l, c, r));
                return false;
            }
            true
        });
        if let Some((l, c, r)) = found {
            return violation(report, fs, l, c, r);
        }
    }
    report
}

/// Condition LCR-local: for every `F` and every partition `(L, C, R)` of
/// `V`, `R ∪ C` is adjacent to `L - F` or `L ∪ C` is adjacent to `R - F`.
pub fn check_lcr_local(d: &SimpleDigraph, f: usize) -> ConditionReport {
    let mut report = lcr_report(Condition::LcrLocal, f);
    for fs in d.nodes().subsets_up_to(f) {
        report.stats.fault_sets += 1;
        let mut found = None;
        for_each_ternary(d.nodes(), |l, c, r| {
            let (lt, rt) = (l - fs, r - fs);
            if lt.is_empty() || rt.is_empty() {
                return true;
            }
            report.stats.partitions += 1;
            let into_l = (heads_into(d, lt) & (r | c)).len();
            let into_r = (heads_into(d, rt) & (l | c)).len();
            if into_l <= f && into_r <= f {
                found = Some((l, c, r));
                return false;
            }
            true
        });
        if let Some((l, c, r)) = found {
            return violation(report, fs, l, c, r);
        }
    }
    report
}

/// The classical graph quantities of a symmetric digraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalQuantities {
    pub n: usize,
    pub min_degree: usize,
    /// `n - 1` for complete graphs.
    pub connectivity: usize,
    pub complete: bool,
}

/// Vertex connectivity of a symmetric digraph, read as an undirected graph.
pub fn vertex_connectivity(d: &SimpleDigraph) -> Result<usize> {
    if !d.is_symmetric() {
        return Err(Error::InvalidArgument("connectivity is defined here for symmetric digraphs only".into()));
    }
    let n = d.nodes().len();
    if d.is_complete() {
        return Ok(n.saturating_sub(1));
    }
    let mut best = n;
    let nodes = d.nodes().to_vec();
    for (i, &s) in nodes.iter().enumerate() {
        for &t in &nodes[i + 1..] {
            if !d.has_arc(s, t) {
                best = best.min(flow::internally_disjoint(d.out_sets(), d.nodes(), s, t, best));
            }
        }
    }
    Ok(best)
}

pub fn classical_quantities(d: &SimpleDigraph) -> Result<ClassicalQuantities> {
    Ok(ClassicalQuantities {
        n: d.nodes().len(),
        min_degree: d.nodes().iter().map(|u| d.out_neighbors(u).len()).min().unwrap_or(0),
        connectivity: vertex_connectivity(d)?,
        complete: d.is_complete(),
    })
}

/// Undirected point-to-point networks: `n >= 3f + 1` and connectivity at
/// least `2f + 1`.
pub fn p2p_undirected_criterion(d: &SimpleDigraph, f: usize) -> Result<(bool, ClassicalQuantities)> {
    let q = classical_quantities(d)?;
    Ok((q.n > 3 * f && q.connectivity > 2 * f, q))
}

/// Undirected local broadcast networks: minimum degree at least `2f` and
/// connectivity at least `⌊3f/2⌋ + 1`.
pub fn local_undirected_criterion(d: &SimpleDigraph, f: usize) -> Result<(bool, ClassicalQuantities)> {
    let q = classical_quantities(d)?;
    Ok((q.min_degree >= 2 * f && q.connectivity > 3 * f / 2, q))
}

/// The three conditions for undirected hypergraphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedConditions {
    /// `n >= 2f + 1`.
    pub c1: bool,
    /// Underlying graph complete or `(2f + 1)`-connected.
    pub c2: bool,
    /// Every cover by three `f`-sets is crossed by one hyperedge.
    pub c3: bool,
    /// `n < f`: no `f`-subsets exist, so `c3` holds vacuously.
    pub n_below_f: bool,
    pub connectivity: usize,
    pub complete: bool,
}

impl UndirectedConditions {
    pub fn all(&self) -> bool {
        self.c1 && self.c2 && self.c3
    }
}

pub fn check_undirected_hypergraph_conditions(g: &DirectedHypergraph, f: usize) -> Result<UndirectedConditions> {
    let hyperedges = g.undirected_hyperedges()?;
    let v = g.nodes();
    let n = v.len();
    let d = g.underlying_graph();
    let connectivity = vertex_connectivity(&d)?;
    let complete = d.is_complete();
    let c3 = if n > 3 * f { true } else { covers_are_crossed(v, f, &hyperedges) };
    Ok(UndirectedConditions { c1: n > 2 * f, c2: complete || connectivity > 2 * f, c3, n_below_f: n < f, connectivity, complete })
}

fn covers_are_crossed(v: NodeSet, f: usize, hyperedges: &[NodeSet]) -> bool {
    let parts = v.subsets_of_size(f);
    for i in 0..parts.len() {
        for j in i..parts.len() {
            for k in j..parts.len() {
                let (a, b, c) = (parts[i], parts[j], parts[k]);
                if a | b | c != v {
                    continue;
                }
                let (pa, pb, pc) = (a - (b | c), b - (a | c), c - (a | b));
                let crossed = hyperedges.iter().any(|&h| !(h & pa).is_empty() && !(h & pb).is_empty() && !(h & pc).is_empty());
                if !crossed {
                    return false;
                }
            }
        }
    }
    true
}

/// `(ℓ, t)`-hyper-`k`-connectivity: for every `C` of exactly `k - 1` nodes
/// and every partition of `V - C` into `ℓ` non-empty parts of size at most
/// `t`, some undirected hyperedge meets every part.
pub fn hyper_k_connected(g: &DirectedHypergraph, l: usize, t: usize, k: usize) -> Result<bool> {
    if l == 0 || t == 0 || k == 0 {
        return Err(Error::InvalidArgument("ℓ, t and k must be positive".into()));
    }
    let hyperedges = g.undirected_hyperedges()?;
    for c in g.nodes().subsets_of_size(k - 1) {
        let rest = (g.nodes() - c).to_vec();
        if !every_partition_crossed(&rest, l, t, &hyperedges) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Walks restricted growth strings so each unordered partition is seen once.
fn every_partition_crossed(items: &[NodeId], l: usize, t: usize, hyperedges: &[NodeSet]) -> bool {
    fn go(items: &[NodeId], i: usize, blocks: &mut Vec<NodeSet>, l: usize, t: usize, hyperedges: &[NodeSet]) -> bool {
        if items.len() - i < l - blocks.len() {
            return true;
        }
        if i == items.len() {
            return hyperedges.iter().any(|&h| blocks.iter().all(|&b| !(h & b).is_empty()));
        }
        for b in 0..blocks.len() {
            if blocks[b].len() < t {
                blocks[b].insert(items[i]);
                let ok = go(items, i + 1, blocks, l, t, hyperedges);
                blocks[b].remove(items[i]);
                if !ok {
                    return false;
                }
            }
        }
        if blocks.len() < l {
            blocks.push(NodeSet::singleton(items[i]));
            let ok = go(items, i + 1, blocks, l, t, hyperedges);
            blocks.pop();
            if !ok {
                return false;
            }
        }
        true
    }
    go(items, 0, &mut Vec::new(), l, t, hyperedges)
}

/// The undirected hypergraph on `3f - 1` nodes that satisfies the
/// undirected-hypergraph conditions but is not `(3, f)`-hyper-`k`-connected.
/// The first `2f + 1` nodes form `X`, the remaining `f - 2` form `Y`; every
/// pair of nodes is a 2-hyperedge and every triple inside `X` a 3-hyperedge.
pub fn counterexample_hypergraph(f: usize) -> Result<DirectedHypergraph> {
    if f <= 2 {
        return Err(Error::InvalidArgument(format!("the counterexample needs f > 2, got {f}")));
    }
    let n = 3 * f - 1;
    let x = NodeSet::full(2 * f + 1);
    let mut hyperedges = NodeSet::full(n).subsets_of_size(2);
    hyperedges.extend(x.subsets_of_size(3));
    DirectedHypergraph::undirected(n, &hyperedges)
}

/// One specialized verdict compared against the general checker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub name: String,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantities: Option<ClassicalQuantities>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undirected: Option<UndirectedConditions>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub classification: Classification,
    pub general: bool,
    pub checks: Vec<ReductionCheck>,
    pub agree: bool,
}

/// Runs the general checker and every applicable specialized condition.
pub fn cross_validate_reduction(g: &DirectedHypergraph, f: usize) -> Result<CrossValidation> {
    let class = g.classify();
    let d = g.underlying_graph();
    let mut checks = Vec::new();
    let plain = |name: &str, holds: bool| ReductionCheck { name: name.into(), holds, quantities: None, undirected: None };
    if class.single_tail {
        checks.push(plain("lcr_p2p", check_lcr_p2p(&d, f).holds));
        if class.bidirectional {
            let (holds, q) = p2p_undirected_criterion(&d, f)?;
            checks.push(ReductionCheck { quantities: Some(q), ..plain("p2p_undirected", holds) });
        }
    }
    if class.single_channel {
        checks.push(plain("lcr_local", check_lcr_local(&d, f).holds));
        if class.bidirectional {
            let (holds, q) = local_undirected_criterion(&d, f)?;
            checks.push(ReductionCheck { quantities: Some(q), ..plain("local_undirected", holds) });
        }
    }
    if class.undirected {
        let u = check_undirected_hypergraph_conditions(g, f)?;
        checks.push(ReductionCheck { undirected: Some(u), ..plain("undirected_hypergraph", u.all()) });
    }
    if checks.is_empty() {
        return Err(Error::InvalidArgument("hypergraph is not point-to-point, local broadcast or undirected".into()));
    }
    let general = check_lcr_hyper(g, f)?.holds;
    let agree = checks.iter().all(|c| c.holds == general);
    Ok(CrossValidation { classification: class, general, checks, agree })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelClass {
    P2p,
    Local,
    Undirected,
}

/// How a class is enumerated for a given `n`.
pub fn enumeration_scope(class: ModelClass, n: usize) -> &'static str {
    match class {
        ModelClass::P2p => "all labeled digraphs",
        ModelClass::Local => "all labeled local broadcast hypergraphs (every node heads one hyperedge)",
        ModelClass::Undirected if n <= 4 => "all labeled undirected hypergraphs",
        ModelClass::Undirected => {
            "undirected hypergraphs with hyperedges of size 2 and 3; the 2-hyperedges range over one graph per isomorphism class"
        }
    }
}

/// Calls `visit` on every instance of `class` with `n` nodes, following
/// [`enumeration_scope`].
pub fn for_each_instance(class: ModelClass, n: usize, mut visit: impl FnMut(&DirectedHypergraph)) -> Result<()> {
    match class {
        ModelClass::P2p => {
            let pairs: Vec<(NodeId, NodeId)> = (0..n).flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v))).collect();
            if pairs.len() >= 32 {
                return Err(Error::InvalidArgument(format!("too many digraphs on {n} nodes to enumerate")));
            }
            for mask in 0u64..(1 << pairs.len()) {
                let arcs = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &a)| a);
                visit(&DirectedHypergraph::point_to_point(&SimpleDigraph::from_arcs(n, arcs)?)?);
            }
        }
        ModelClass::Local => {
            if !(2..=6).contains(&n) {
                return Err(Error::InvalidArgument(format!("local broadcast enumeration supports 2 <= n <= 6, got {n}")));
            }
            let choices = (1u64 << (n - 1)) - 1;
            let total = choices.pow(n as u32);
            for code in 0..total {
                let mut g = DirectedHypergraph::new(n)?;
                let mut rest = code;
                for u in 0..n {
                    let pick = rest % choices + 1;
                    rest /= choices;
                    let others: Vec<NodeId> = (0..n).filter(|&v| v != u).collect();
                    let tails: NodeSet = others.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).map(|(_, &v)| v).collect();
                    g.add_edge(u, tails)?;
                }
                visit(&g);
            }
        }
        ModelClass::Undirected => {
            let all = NodeSet::full(n);
            if n <= 4 {
                let shapes: Vec<NodeSet> = all.subsets().filter(|s| s.len() >= 2).collect();
                for mask in 0u64..(1 << shapes.len()) {
                    let chosen: Vec<NodeSet> = shapes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s).collect();
                    visit(&DirectedHypergraph::undirected(n, &chosen)?);
                }
            } else if n <= 6 {
                let pairs = all.subsets_of_size(2);
                let triples = all.subsets_of_size(3);
                if triples.len() >= 32 {
                    return Err(Error::InvalidArgument(format!("too many hypergraphs on {n} nodes to enumerate")));
                }
                for graph in graph_isomorphism_representatives(n) {
                    let base: Vec<NodeSet> = pairs.iter().enumerate().filter(|(i, _)| graph >> i & 1 == 1).map(|(_, &s)| s).collect();
                    for mask in 0u64..(1 << triples.len()) {
                        let mut chosen = base.clone();
                        chosen.extend(triples.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s));
                        visit(&DirectedHypergraph::undirected(n, &chosen)?);
                    }
                }
            } else {
                return Err(Error::InvalidArgument(format!("undirected enumeration supports n <= 6, got {n}")));
            }
        }
    }
    Ok(())
}

/// One simple graph per isomorphism class, as bitmasks over the 2-subsets of
/// `0..n` in lexicographic order.
fn graph_isomorphism_representatives(n: usize) -> Vec<u64> {
    let pairs = NodeSet::full(n).subsets_of_size(2);
    let index = |a: NodeId, b: NodeId| pairs.iter().position(|p| *p == NodeSet::from_iter([a, b])).expect("pair");
    let mut perms = Vec::new();
    permutations(&mut (0..n).collect(), 0, &mut perms);
    let maps: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| {
            pairs
                .iter()
                .map(|pair| {
                    let v = pair.to_vec();
                    index(p[v[0]], p[v[1]])
                })
                .collect()
        })
        .collect();
    let mut reps = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let canonical = maps
            .iter()
            .map(|m| m.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0u64, |acc, (_, &j)| acc | 1 << j))
            .min()
            .unwrap_or(mask);
        if canonical == mask {
            reps.push(mask);
        }
    }
    reps
}

fn permutations(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, out);
        items.swap(k, i);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossvalRow {
    pub n: usize,
    pub scope: String,
    pub instances: u64,
    pub general_holds: u64,
    pub disagreements: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossvalSummary {
    pub class: ModelClass,
    pub f: usize,
    pub rows: Vec<CrossvalRow>,
    pub disagreements: u64,
    /// Up to ten disagreeing instances in the text format.
    pub examples: Vec<String>,
}

/// Cross-validates every instance of `class` with `f < n <= n_max`.
pub fn crossval_class(class: ModelClass, n_max: usize, f: usize) -> Result<CrossvalSummary> {
    let mut rows = Vec::new();
    let mut examples = Vec::new();
    let mut first_err = None;
    for n in (f + 1).max(2)..=n_max {
        let mut row = CrossvalRow { n, scope: enumeration_scope(class, n).into(), instances: 0, general_holds: 0, disagreements: 0 };
        for_each_instance(class, n, |g| {
            if first_err.is_some() {
                return;
            }
            match cross_validate_reduction(g, f) {
                Ok(cv) => {
                    row.instances += 1;
                    row.general_holds += cv.general as u64;
                    if !cv.agree {
                        row.disagreements += 1;
                        if examples.len() < 10 {
                            examples.push(crate::format::serialize(g));
                        }
                    }
                }
                Err(e) => first_err = Some(e),
            }
        })?;
        if let Some(e) = first_err {
            return Err(e);
        }
        rows.push(row);
    }
    let disagreements = rows.iter().map(|r| r.disagreements).sum();
    Ok(CrossvalSummary { class, f, rows, disagreements, examples })
}
