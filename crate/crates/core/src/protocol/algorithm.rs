//! The phase-based consensus algorithm for local multicast networks.
//!
//! Every phase fixes a candidate fault set `F` with `|F| <= f`:
//!
//! * (a) `S` is the unique source component of `G - F`;
//! * (b) `S` and its in-neighbors in `F` flood their state;
//! * (c) each `v ∈ S` splits all of `F`, assigning every channel of a node
//!   `u ∈ F` by the value `v` heard from `u` over that channel, and sorts
//!   `S` and the copies of `N_in(F, S)` into `Z_v` (heard 0) and `N_v`;
//! * (d) whichever of `Z_v`, `N_v` propagates to the other side feeds `v`
//!   through `f + 1` disjoint paths carrying one value;
//! * (e) `S` floods again and (f) the rest of `G - F` adopts any value it
//!   hears over `f + 1` disjoint paths from `S`.

use super::engine::{BoxedProgram, NodeProgram};
use super::flood::{canonical_path, FloodMessage, FloodState, Records, Trace};
use crate::conditions::propagates;
use crate::error::Result;
use crate::hypergraph::{DirectedHypergraph, EdgeId, NodeId};
use crate::nodeset::NodeSet;
use crate::splitting::{split, SplitCopy, SplitHypergraph, SplitSpec};
use crate::Bit;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// A deterministic synchronous protocol that can be instantiated per node.
pub trait Protocol: Send + Sync {
    type Msg: Clone + Serialize + Send;

    fn rounds(&self) -> usize;

    fn spawn(&self, node: NodeId, input: Bit) -> BoxedProgram<'static, Self::Msg>;
}

/// What every node knows about one phase before it starts.
#[derive(Debug)]
pub struct PhasePlan {
    pub fault_set: NodeSet,
    /// The unique source component of `G - F`, if there is exactly one.
    pub source: Option<NodeSet>,
    /// `N_in(F, S)`.
    pub phi: NodeSet,
    pub diagnostic: Option<String>,
    minus_f: SplitHypergraph,
    /// Canonical `uv`-paths in `G[S]`, keyed by `(u, v)`.
    inner_paths: HashMap<(NodeId, NodeId), Option<Trace>>,
    /// Canonical paths in `G[S, {e}]` from the head of `e` to `v`, keyed by `(e, v)`.
    edge_paths: HashMap<(EdgeId, NodeId), Option<Trace>>,
}

impl PhasePlan {
    fn new(g: &DirectedHypergraph, fault_set: NodeSet) -> Self {
        let minus = g.without(fault_set);
        let sources = minus.source_components();
        let minus_f = SplitHypergraph::unsplit(&minus, NodeSet::empty());
        let mut plan = PhasePlan {
            fault_set,
            source: None,
            phi: NodeSet::empty(),
            diagnostic: None,
            minus_f,
            inner_paths: HashMap::new(),
            edge_paths: HashMap::new(),
        };
        if sources.len() != 1 {
            plan.diagnostic = Some(format!(
                "G - {fault_set} has {} source components {:?}; phase skipped",
                sources.len(),
                sources.iter().map(|s| s.to_string()).collect::<Vec<_>>()
            ));
            return plan;
        }
        let s = sources[0];
        plan.source = Some(s);
        plan.phi = g.heads_into(s) & fault_set;
        let inner = g.induced(s);
        for u in s {
            for v in s {
                plan.inner_paths.insert((u, v), canonical_path(&inner, u, v));
            }
        }
        for e in g.edges().iter().filter(|e| fault_set.contains(e.head)) {
            let with_e = g.induced_with_edges(s, &[e.id]).expect("edge of G");
            for v in s {
                plan.edge_paths.insert((e.id, v), canonical_path(&with_e, e.head, v));
            }
        }
        plan
    }
}

struct Plan {
    graph: Arc<DirectedHypergraph>,
    f: usize,
    flood_rounds: usize,
    phases: Vec<PhasePlan>,
}

/// The algorithm for a fixed network and fault budget.
#[derive(Clone)]
pub struct Algorithm1 {
    plan: Arc<Plan>,
}

impl Algorithm1 {
    pub fn new(g: &DirectedHypergraph, f: usize) -> Self {
        let phases = g.nodes().subsets_up_to(f).into_iter().map(|fs| PhasePlan::new(g, fs)).collect();
        Algorithm1 { plan: Arc::new(Plan { graph: Arc::new(g.clone()), f, flood_rounds: g.node_count(), phases }) }
    }

    pub fn phases(&self) -> &[PhasePlan] {
        &self.plan.phases
    }

    pub fn graph(&self) -> &DirectedHypergraph {
        &self.plan.graph
    }

    /// Rounds in one phase: two floods of `n` rounds each.
    pub fn rounds_per_phase(&self) -> usize {
        2 * self.plan.flood_rounds
    }

    pub fn node(&self, me: NodeId, input: Bit) -> ConsensusNode {
        ConsensusNode { plan: self.plan.clone(), me, gamma: input, flood: FloodState::new(self.plan.graph.clone(), me) }
    }
}

impl Protocol for Algorithm1 {
    type Msg = FloodMessage;

    fn rounds(&self) -> usize {
        self.plan.phases.len() * self.rounds_per_phase()
    }

    fn spawn(&self, node: NodeId, input: Bit) -> BoxedProgram<'static, FloodMessage> {
        Box::new(self.node(node, input))
    }
}

/// One node running the algorithm.
pub struct ConsensusNode {
    plan: Arc<Plan>,
    me: NodeId,
    gamma: Bit,
    flood: FloodState,
}

impl ConsensusNode {
    pub fn gamma(&self) -> Bit {
        self.gamma
    }

    /// Steps (c) and (d).
    fn update_in_source(&mut self, phase: &PhasePlan, s: NodeSet) {
        let me = self.me;
        let records = self.flood.records();
        let (gp, z, n) = construct(&self.plan.graph, phase.fault_set, s, phase.phi, records, |e| {
            phase.edge_paths.get(&(e, me)).cloned().flatten()
        }, |u| phase.inner_paths.get(&(u, me)).cloned().flatten());
        let k = self.plan.f + 1;
        let fp = gp.f_prime();
        let z_first = propagates(gp.graph(), z, n - fp, self.plan.f, n & fp).expect("Z and N are disjoint");
        let (a, b) = if z_first { (z, n) } else { (n, z) };
        if b.contains(me) && !fp.contains(me) {
            let masks = value_path_masks(me, a, &gp, b & fp, records);
            if let Some(bit) = [0, 1].into_iter().find(|&bit| pack(&masks[bit as usize], k)) {
                self.gamma = bit;
            }
        }
    }

    /// Step (f).
    fn update_outside(&mut self, phase: &PhasePlan, s: NodeSet) {
        let masks = value_path_masks(self.me, s, &phase.minus_f, NodeSet::empty(), self.flood.records());
        if let Some(bit) = [0, 1].into_iter().find(|&bit| pack(&masks[bit as usize], self.plan.f + 1)) {
            self.gamma = bit;
        }
    }
}

impl NodeProgram for ConsensusNode {
    type Msg = FloodMessage;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, FloodMessage)> {
        let plan = self.plan.clone();
        let per_phase = 2 * plan.flood_rounds;
        let phase = &plan.phases[round / per_phase];
        let offset = round % per_phase;
        let n = plan.flood_rounds;
        if offset == 0 {
            let sends = phase.source.is_some_and(|s| (s | phase.phi).contains(self.me));
            self.flood.start(sends.then_some(self.gamma));
        } else if offset == n {
            let in_source = phase.source.filter(|s| s.contains(self.me));
            if let Some(s) = in_source {
                self.update_in_source(phase, s);
            }
            self.flood.start(in_source.map(|_| self.gamma));
        }
        self.flood.outgoing()
    }

    fn receive(&mut self, round: usize, inbox: &[(EdgeId, FloodMessage)]) {
        let plan = self.plan.clone();
        let per_phase = 2 * plan.flood_rounds;
        let phase = &plan.phases[round / per_phase];
        let offset = round % per_phase;
        self.flood.ingest(offset % plan.flood_rounds, inbox);
        if offset == per_phase - 1 {
            if let Some(s) = phase.source {
                if !(s | phase.fault_set).contains(self.me) {
                    self.update_outside(phase, s);
                }
            }
        }
    }

    fn state(&self) -> Option<Bit> {
        Some(self.gamma)
    }
}

#[allow(clippy::too_many_arguments)]
fn construct(
    g: &DirectedHypergraph,
    fs: NodeSet,
    s: NodeSet,
    phi: NodeSet,
    records: &Records,
    edge_path: impl Fn(EdgeId) -> Option<Trace>,
    inner_path: impl Fn(NodeId) -> Option<Trace>,
) -> (SplitHypergraph, NodeSet, NodeSet) {
    let heard_zero = |p: Option<Trace>| p.and_then(|p| records.get(&p).copied()) == Some(0);
    let assignment: BTreeMap<EdgeId, SplitCopy> = g
        .edges()
        .iter()
        .filter(|e| fs.contains(e.head))
        .map(|e| (e.id, if heard_zero(edge_path(e.id)) { SplitCopy::Zero } else { SplitCopy::One }))
        .collect();
    let gp = split(g, fs, &SplitSpec { split_set: fs, assignment }).expect("assignment covers the channels of F");
    let zero_in_s: NodeSet = s.iter().filter(|&u| heard_zero(inner_path(u))).collect();
    let z = zero_in_s | phi.iter().map(|u| gp.member(u, SplitCopy::Zero)).collect::<NodeSet>();
    let n = (s - zero_in_s) | phi.iter().map(|u| gp.member(u, SplitCopy::One)).collect::<NodeSet>();
    (gp, z, n)
}

/// Step (c) for node `v ∈ S`: the split hypergraph `G'_v` and the sets
/// `Z_v`, `N_v`, from the records `v` collected in the first flood.
pub fn step_c_construct(g: &DirectedHypergraph, fs: NodeSet, s: NodeSet, v: NodeId, records: &Records) -> Result<(SplitHypergraph, NodeSet, NodeSet)> {
    if !s.contains(v) {
        return Err(crate::Error::InvalidArgument(format!("{v} is not in the source component {s}")));
    }
    let inner = g.induced(s);
    let phi = g.heads_into(s) & fs;
    let mut with_edge = HashMap::new();
    for e in g.edges().iter().filter(|e| fs.contains(e.head)) {
        with_edge.insert(e.id, canonical_path(&g.induced_with_edges(s, &[e.id])?, e.head, v));
    }
    Ok(construct(g, fs, s, phi, records, |e| with_edge.get(&e).cloned().flatten(), |u| canonical_path(&inner, u, v)))
}

/// `true` iff `k` node-disjoint `Av`-paths of `G' - excluded` each carry
/// `b` in `records` once mapped back to `G`.
pub fn disjoint_paths_with_value(v: NodeId, a: NodeSet, gp: &SplitHypergraph, excluded: NodeSet, b: Bit, records: &Records, k: usize) -> bool {
    b <= 1 && pack(&value_path_masks(v, a, gp, excluded, records)[b as usize], k)
}

/// Node sets (minus `v`) of the `Av`-paths of `G' - excluded`, split by
/// the value `v` holds for their image in `G`. A missing record counts as
/// 1; a path whose image repeats a node carries nothing.
fn value_path_masks(v: NodeId, a: NodeSet, gp: &SplitHypergraph, excluded: NodeSet, records: &Records) -> [Vec<NodeSet>; 2] {
    let h = gp.graph();
    let present = h.nodes() - excluded;
    if !present.contains(v) || a.contains(v) {
        return [Vec::new(), Vec::new()];
    }
    let mut out_edges: Vec<Vec<(EdgeId, NodeSet)>> = vec![Vec::new(); h.n()];
    for e in h.edges() {
        if present.contains(e.head) {
            out_edges[e.head].push((e.id, e.tails & present));
        }
    }
    struct Walk<'a> {
        v: NodeId,
        gp: &'a SplitHypergraph,
        out_edges: &'a [Vec<(EdgeId, NodeSet)>],
        records: &'a Records,
        steps: Vec<usize>,
        masks: [Vec<NodeSet>; 2],
    }
    impl Walk<'_> {
        fn go(&mut self, x: NodeId, used: NodeSet, used_origin: NodeSet) {
            for &(e, tails) in &self.out_edges[x] {
                for t in tails - used {
                    let o = self.gp.origin(t);
                    if used_origin.contains(o) {
                        continue;
                    }
                    self.steps.extend([e, o]);
                    if t == self.v {
                        let value = self.records.get(&self.steps[..]).copied().unwrap_or(1).min(1);
                        self.masks[value as usize].push(used);
                    } else {
                        let mut u2 = used;
                        u2.insert(t);
                        let mut o2 = used_origin;
                        o2.insert(o);
                        self.go(t, u2, o2);
                    }
                    self.steps.truncate(self.steps.len() - 2);
                }
            }
        }
    }
    let mut walk = Walk { v, gp, out_edges: &out_edges, records, steps: Vec::new(), masks: [Vec::new(), Vec::new()] };
    for src in a & present {
        walk.steps = vec![gp.origin(src)];
        walk.go(src, NodeSet::singleton(src), NodeSet::singleton(gp.origin(src)));
    }
    walk.masks.map(minimal_sets)
}

/// Deduplicates and drops every set that contains another one.
fn minimal_sets(mut sets: Vec<NodeSet>) -> Vec<NodeSet> {
    sets.sort_by_key(|s| (s.len(), s.bits()));
    sets.dedup();
    let mut kept: Vec<NodeSet> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| k.is_subset(s)) {
            kept.push(s);
        }
    }
    kept
}

/// Whether `k` pairwise disjoint sets can be picked from `sets`.
fn pack(sets: &[NodeSet], k: usize) -> bool {
    fn go(sets: &[NodeSet], start: usize, used: NodeSet, left: usize) -> bool {
        if left == 0 {
            return true;
        }
        (start..sets.len()).any(|i| sets[i].is_disjoint(used) && go(sets, i + 1, used | sets[i], left - 1))
    }
    go(sets, 0, NodeSet::empty(), k)
}
