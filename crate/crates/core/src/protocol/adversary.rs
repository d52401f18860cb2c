//! Byzantine behaviors for faulty nodes.
//!
//! Every strategy wraps honest program instances and only changes what a
//! faulty node emits. The engine still delivers each channel's message
//! identically to all of its tails, so a faulty node can tell different
//! stories only on different channels.

use super::engine::{BoxedProgram, NodeProgram};
use super::flood::{FloodMessage, Relay};
use crate::conditions::Witness;
use crate::hypergraph::{DirectedHypergraph, EdgeId, NodeId};
use crate::nodeset::NodeSet;
use crate::splitting::{SplitCopy, SplitSpec};
use crate::Bit;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdversaryStrategy {
    /// Follows the protocol with its own input.
    Honest,
    /// Sends `bit` in place of every value it emits.
    Constant { bit: Bit },
    /// Originates honestly but inverts every value it relays.
    FlipForwarding,
    /// Never transmits.
    Silent,
    /// Runs an input-0 and an input-1 persona and speaks on each channel
    /// with the persona its copy is assigned to. Without an explicit split,
    /// every faulty node is split and its channels alternate between the
    /// personas in id order.
    SplitPersona {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        split: Option<SplitSpec>,
    },
}

impl AdversaryStrategy {
    /// The built-in strategies used by sweeps.
    pub fn library() -> Vec<AdversaryStrategy> {
        vec![
            AdversaryStrategy::Honest,
            AdversaryStrategy::Constant { bit: 0 },
            AdversaryStrategy::Constant { bit: 1 },
            AdversaryStrategy::FlipForwarding,
            AdversaryStrategy::Silent,
            AdversaryStrategy::SplitPersona { split: None },
        ]
    }

    /// Whether what a faulty node emits is independent of its own input.
    pub fn ignores_own_input(&self) -> bool {
        matches!(self, AdversaryStrategy::Constant { .. } | AdversaryStrategy::Silent | AdversaryStrategy::SplitPersona { split: None })
    }

    pub fn name(&self) -> String {
        match self {
            AdversaryStrategy::Honest => "honest".into(),
            AdversaryStrategy::Constant { bit } => format!("constant-{bit}"),
            AdversaryStrategy::FlipForwarding => "flip_forwarding".into(),
            AdversaryStrategy::Silent => "silent".into(),
            AdversaryStrategy::SplitPersona { split: None } => "split_persona".into(),
            AdversaryStrategy::SplitPersona { split: Some(_) } => "split_persona(witness)".into(),
        }
    }
}

/// Equivocation along the split of a condition witness.
pub fn split_persona_adversary(witness: &Witness) -> AdversaryStrategy {
    if witness.split.split_set.is_empty() {
        AdversaryStrategy::Honest
    } else {
        AdversaryStrategy::SplitPersona { split: Some(witness.split.clone()) }
    }
}

/// Splits every node of `faulty`, alternating its channels (sorted by id)
/// between copy 0 and copy 1.
pub fn alternating_split(g: &DirectedHypergraph, faulty: NodeSet) -> SplitSpec {
    let mut assignment = BTreeMap::new();
    for u in faulty {
        let mut ids: Vec<EdgeId> = g.out_edges(u).map(|e| e.id).collect();
        ids.sort_unstable();
        for (i, e) in ids.into_iter().enumerate() {
            assignment.insert(e, if i % 2 == 0 { SplitCopy::Zero } else { SplitCopy::One });
        }
    }
    SplitSpec { split_set: faulty, assignment }
}

/// The program a faulty `node` runs. `spawn(b)` builds an honest instance
/// of the protocol with input `b`; `input` is the node's own input.
pub fn faulty_program<'a>(
    strategy: &AdversaryStrategy,
    g: &DirectedHypergraph,
    faulty: NodeSet,
    node: NodeId,
    input: Bit,
    spawn: &dyn Fn(Bit) -> BoxedProgram<'a, FloodMessage>,
) -> BoxedProgram<'a, FloodMessage> {
    match strategy {
        AdversaryStrategy::Honest => spawn(input),
        AdversaryStrategy::Constant { bit } => Box::new(Rewrite { inner: spawn(input), kind: RewriteKind::Constant(*bit) }),
        AdversaryStrategy::FlipForwarding => Box::new(Rewrite { inner: spawn(input), kind: RewriteKind::FlipForwarded }),
        AdversaryStrategy::Silent => Box::new(Rewrite { inner: spawn(input), kind: RewriteKind::Silent }),
        AdversaryStrategy::SplitPersona { split } => {
            let spec = split.clone().unwrap_or_else(|| alternating_split(g, faulty));
            if !spec.split_set.contains(node) {
                return spawn(input);
            }
            let assignment = g.out_edges(node).map(|e| (e.id, spec.assignment.get(&e.id).copied().unwrap_or(SplitCopy::Zero))).collect();
            Box::new(Personas { zero: spawn(0), one: spawn(1), assignment })
        }
    }
}

enum RewriteKind {
    Constant(Bit),
    FlipForwarded,
    Silent,
}

/// Honest execution whose outgoing records pass through a rewrite hook.
struct Rewrite<'a> {
    inner: BoxedProgram<'a, FloodMessage>,
    kind: RewriteKind,
}

impl Rewrite<'_> {
    fn rewrite(&self, relays: &[Relay]) -> Vec<Relay> {
        match self.kind {
            RewriteKind::Silent => Vec::new(),
            RewriteKind::Constant(b) => relays.iter().map(|r| Relay { trace: r.trace.clone(), value: b }).collect(),
            RewriteKind::FlipForwarded => relays
                .iter()
                .map(|r| Relay { trace: r.trace.clone(), value: if r.trace.node_count() > 1 { 1 - r.value } else { r.value } })
                .collect(),
        }
    }
}

impl NodeProgram for Rewrite<'_> {
    type Msg = FloodMessage;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, FloodMessage)> {
        let sent = self.inner.send(round);
        sent.into_iter()
            .filter_map(|(e, msg)| {
                let out = self.rewrite(&msg);
                (!out.is_empty()).then(|| (e, Arc::new(out)))
            })
            .collect()
    }

    fn receive(&mut self, round: usize, inbox: &[(EdgeId, FloodMessage)]) {
        self.inner.receive(round, inbox);
    }
}

/// Two honest personas sharing one set of channels.
struct Personas<'a> {
    zero: BoxedProgram<'a, FloodMessage>,
    one: BoxedProgram<'a, FloodMessage>,
    assignment: BTreeMap<EdgeId, SplitCopy>,
}

impl NodeProgram for Personas<'_> {
    type Msg = FloodMessage;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, FloodMessage)> {
        let zero = self.zero.send(round);
        let one = self.one.send(round);
        let assignment = &self.assignment;
        let pick = |copy: SplitCopy, sent: Vec<(EdgeId, FloodMessage)>| {
            sent.into_iter().filter(move |(e, _)| assignment.get(e) == Some(&copy))
        };
        let mut out: Vec<(EdgeId, FloodMessage)> = pick(SplitCopy::Zero, zero).chain(pick(SplitCopy::One, one)).collect();
        out.sort_by_key(|(e, _)| *e);
        out
    }

    fn receive(&mut self, round: usize, inbox: &[(EdgeId, FloodMessage)]) {
        self.zero.receive(round, inbox);
        self.one.receive(round, inbox);
    }
}
