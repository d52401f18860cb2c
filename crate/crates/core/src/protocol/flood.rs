//! Flooding with path traces.
//!
//! A flooded value travels as a record whose trace lists every node and
//! channel it crossed. Receivers drop records whose trace is not a simple
//! path of `G` ending at the sender of the channel they arrived on, so a
//! faulty relay can alter values but cannot forge where a record has been.

use super::engine::{self, BoxedProgram, Network, NodeProgram};
use crate::hypergraph::{DirectedHypergraph, EdgeId, NodeId};
use crate::nodeset::NodeSet;
use crate::Bit;
use serde::{Deserialize, Serialize};
use rustc_hash::FxHashMap;
use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

/// A path written as `node, edge, node, ..., node`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trace(Arc<[usize]>);

impl Trace {
    pub fn single(v: NodeId) -> Trace {
        Trace(Arc::new([v]))
    }

    /// Builds a trace from its nodes and the edges between them.
    pub fn from_parts(nodes: &[NodeId], edges: &[EdgeId]) -> Trace {
        assert_eq!(nodes.len(), edges.len() + 1, "a trace has one more node than edges");
        let mut steps = vec![nodes[0]];
        for (e, v) in edges.iter().zip(&nodes[1..]) {
            steps.extend([*e, *v]);
        }
        Trace(steps.into())
    }

    pub fn steps(&self) -> &[usize] {
        &self.0
    }

    pub fn origin(&self) -> NodeId {
        self.0[0]
    }

    pub fn last(&self) -> NodeId {
        self.0[self.0.len() - 1]
    }

    pub fn node_count(&self) -> usize {
        self.0.len() / 2 + 1
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().step_by(2).copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.0.iter().skip(1).step_by(2).copied()
    }

    pub fn extended(&self, e: EdgeId, v: NodeId) -> Trace {
        let mut steps = Vec::with_capacity(self.0.len() + 2);
        steps.extend_from_slice(&self.0);
        steps.extend([e, v]);
        Trace(steps.into())
    }

    /// A simple path of `g` (every step `x, e, y` has head `x` and tail `y`).
    pub fn is_simple_path_in(&self, g: &DirectedHypergraph) -> bool {
        if self.0.len().is_multiple_of(2) {
            return false;
        }
        let mut seen = NodeSet::empty();
        for v in self.nodes() {
            if !g.nodes().contains(v) || seen.contains(v) {
                return false;
            }
            seen.insert(v);
        }
        self.0.windows(3).step_by(2).all(|w| g.edge(w[1]).is_some_and(|e| e.head == w[0] && e.tails.contains(w[2])))
    }
}

impl Borrow<[usize]> for Trace {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

/// A value in flight: `trace` ends at the node that is sending it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relay {
    pub trace: Trace,
    pub value: Bit,
}

/// The payload of one transmission: every record forwarded this round.
pub type FloodMessage = Arc<Vec<Relay>>;

/// A value held by its recipient; the trace ends at the recipient.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FloodRecord {
    pub origin: NodeId,
    pub trace: Trace,
    pub value: Bit,
}

/// Records held by one node, keyed by trace.
pub type Records = FxHashMap<Trace, Bit>;

/// One node's side of a flood.
#[derive(Debug, Clone)]
pub struct FloodState {
    graph: Arc<DirectedHypergraph>,
    me: NodeId,
    out: Vec<EdgeId>,
    received: Records,
    fresh: Vec<Relay>,
    scratch: Vec<usize>,
}

impl FloodState {
    pub fn new(graph: Arc<DirectedHypergraph>, me: NodeId) -> Self {
        let out = graph.out_edges(me).map(|e| e.id).collect();
        FloodState { graph, me, out, received: Records::default(), fresh: Vec::new(), scratch: Vec::new() }
    }

    /// Clears all records; a node with a value starts a new flood with it.
    pub fn start(&mut self, value: Option<Bit>) {
        self.received.clear();
        self.fresh.clear();
        if let Some(b) = value {
            let own = Trace::single(self.me);
            self.received.insert(own.clone(), b);
            self.fresh.push(Relay { trace: own, value: b });
        }
    }

    /// Records not yet forwarded, once on each own channel.
    pub fn outgoing(&mut self) -> Vec<(EdgeId, FloodMessage)> {
        if self.fresh.is_empty() {
            return Vec::new();
        }
        let msg: FloodMessage = Arc::new(std::mem::take(&mut self.fresh));
        self.out.iter().map(|&e| (e, msg.clone())).collect()
    }

    /// Accepts well-formed records from relay round `step` (records then
    /// carry `step + 1` nodes); the first value for a trace wins.
    pub fn ingest(&mut self, step: usize, inbox: &[(EdgeId, FloodMessage)]) {
        for (e, msg) in inbox {
            let Some(edge) = self.graph.edge(*e) else { continue };
            if !edge.tails.contains(self.me) {
                continue;
            }
            for relay in msg.iter() {
                let t = &relay.trace;
                if relay.value > 1
                    || t.steps().is_empty()
                    || t.node_count() != step + 1
                    || t.last() != edge.head
                    || t.nodes().any(|x| x == self.me)
                    || !t.is_simple_path_in(&self.graph)
                {
                    continue;
                }
                self.scratch.clear();
                self.scratch.extend_from_slice(t.steps());
                self.scratch.extend([*e, self.me]);
                if !self.received.contains_key(&self.scratch[..]) {
                    let full = Trace(Arc::from(&self.scratch[..]));
                    self.received.insert(full.clone(), relay.value);
                    self.fresh.push(Relay { trace: full, value: relay.value });
                }
            }
        }
    }

    pub fn records(&self) -> &Records {
        &self.received
    }
}

/// A node that only takes part in one flood.
pub struct FloodNode {
    state: FloodState,
    value: Option<Bit>,
}

impl FloodNode {
    pub fn new(graph: Arc<DirectedHypergraph>, me: NodeId, value: Option<Bit>) -> Self {
        FloodNode { state: FloodState::new(graph, me), value }
    }
}

impl NodeProgram for FloodNode {
    type Msg = FloodMessage;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, FloodMessage)> {
        if round == 0 {
            self.state.start(self.value);
        }
        self.state.outgoing()
    }

    fn receive(&mut self, round: usize, inbox: &[(EdgeId, FloodMessage)]) {
        self.state.ingest(round, inbox);
    }
}

enum Participant<'a> {
    Honest(FloodNode),
    Faulty(BoxedProgram<'a, FloodMessage>),
}

impl NodeProgram for Participant<'_> {
    type Msg = FloodMessage;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, FloodMessage)> {
        match self {
            Participant::Honest(p) => p.send(round),
            Participant::Faulty(p) => p.send(round),
        }
    }

    fn receive(&mut self, round: usize, inbox: &[(EdgeId, FloodMessage)]) {
        match self {
            Participant::Honest(p) => p.receive(round, inbox),
            Participant::Faulty(p) => p.receive(round, inbox),
        }
    }
}

/// Floods `send_value` from every sender for `n` rounds and returns the
/// records of every non-faulty node. Nodes listed in `behaviors` are faulty
/// and act through their strategy.
pub fn flood(
    g: &DirectedHypergraph,
    senders: NodeSet,
    send_value: &BTreeMap<NodeId, Bit>,
    behaviors: &BTreeMap<NodeId, super::AdversaryStrategy>,
) -> crate::Result<BTreeMap<NodeId, BTreeSet<FloodRecord>>> {
    if !senders.is_subset(g.nodes()) {
        return Err(crate::Error::InvalidArgument(format!("senders {senders} are not nodes of G")));
    }
    let graph = Arc::new(g.clone());
    let faulty: NodeSet = behaviors.keys().collect();
    let mut programs = Vec::with_capacity(g.n());
    for v in 0..g.n() {
        if !g.nodes().contains(v) {
            programs.push(None);
            continue;
        }
        let value = if senders.contains(v) {
            Some(*send_value.get(&v).ok_or_else(|| crate::Error::InvalidArgument(format!("no value for sender {v}")))?)
        } else {
            None
        };
        programs.push(Some(match behaviors.get(&v) {
            None => Participant::Honest(FloodNode::new(graph.clone(), v, value)),
            Some(strategy) => {
                let spawn = |b: Bit| -> BoxedProgram<FloodMessage> { Box::new(FloodNode::new(graph.clone(), v, value.map(|_| b))) };
                Participant::Faulty(super::adversary::faulty_program(strategy, g, faulty, v, value.unwrap_or(0), &spawn))
            }
        }));
    }
    engine::run(&Network::of(g), &mut programs, g.node_count(), false, |_, _| {});
    let mut out = BTreeMap::new();
    for (v, slot) in programs.iter().enumerate() {
        if let Some(Participant::Honest(p)) = slot {
            let set = p.state.records().iter().map(|(t, &b)| FloodRecord { origin: t.origin(), trace: t.clone(), value: b }).collect();
            out.insert(v, set);
        }
    }
    Ok(out)
}

/// The value `records` hold for exactly this trace, if any.
pub fn value_along_path(records: &Records, origin: NodeId, path: &Trace) -> Option<Bit> {
    if path.steps().is_empty() || path.origin() != origin {
        return None;
    }
    records.get(path).copied()
}

/// The shortest `uv`-path of `g`, ties broken by the lexicographically
/// smallest `node, edge, node, ...` sequence.
pub fn canonical_path(g: &DirectedHypergraph, u: NodeId, v: NodeId) -> Option<Trace> {
    if !g.nodes().contains(u) || !g.nodes().contains(v) {
        return None;
    }
    if u == v {
        return Some(Trace::single(v));
    }
    // Distances to v, by backward BFS.
    let mut dist = vec![usize::MAX; g.n()];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    while let Some(y) = queue.pop_front() {
        for e in g.edges() {
            if e.tails.contains(y) && dist[e.head] == usize::MAX {
                dist[e.head] = dist[y] + 1;
                queue.push_back(e.head);
            }
        }
    }
    if dist[u] == usize::MAX {
        return None;
    }
    let mut steps = vec![u];
    let mut x = u;
    while x != v {
        let (e, y) = g
            .out_edges(x)
            .flat_map(|e| e.tails.iter().filter(|&t| dist[t].checked_add(1) == Some(dist[x])).map(move |t| (e.id, t)))
            .min()
            .expect("a BFS successor exists");
        steps.extend([e, y]);
        x = y;
    }
    Some(Trace(steps.into()))
}
