//! A synchronous round engine over labeled multicast channels.

use crate::hypergraph::{DirectedHypergraph, EdgeId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Deterministic per-process logic driven by the engine.
pub trait NodeProgram {
    type Msg: Clone;

    /// Messages to emit this round, tagged by channel label.
    fn send(&mut self, round: usize) -> Vec<(EdgeId, Self::Msg)>;

    /// Everything delivered this round, sorted by label.
    fn receive(&mut self, round: usize, inbox: &[(EdgeId, Self::Msg)]);

    /// The current state bit, if the program keeps one.
    fn state(&self) -> Option<crate::Bit> {
        None
    }
}

pub type BoxedProgram<'a, M> = Box<dyn NodeProgram<Msg = M> + Send + 'a>;

impl<P: NodeProgram + ?Sized> NodeProgram for Box<P> {
    type Msg = P::Msg;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, Self::Msg)> {
        (**self).send(round)
    }

    fn receive(&mut self, round: usize, inbox: &[(EdgeId, Self::Msg)]) {
        (**self).receive(round, inbox)
    }

    fn state(&self) -> Option<crate::Bit> {
        (**self).state()
    }
}

/// A multicast channel: whatever `sender` emits under `label` in a round
/// reaches every receiver identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub label: EdgeId,
    pub sender: usize,
    pub receivers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub processes: usize,
    pub channels: Vec<Channel>,
}

impl Network {
    /// One process per node id and one channel per hyperedge.
    pub fn of(g: &DirectedHypergraph) -> Network {
        Network {
            processes: g.n(),
            channels: g
                .edges()
                .iter()
                .map(|e| Channel { label: e.id, sender: e.head, receivers: e.tails.to_vec() })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reception<M> {
    pub round: usize,
    pub edge: EdgeId,
    pub payload: M,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog<M> {
    /// Per process, every delivered message in order.
    pub receptions: Vec<Vec<Reception<M>>>,
    /// Per process and round, what it emitted.
    pub sends: Vec<Vec<Vec<(EdgeId, M)>>>,
}

/// Runs `rounds` rounds. Processes without a program are absent: they send
/// nothing and their deliveries are dropped. `after_round` sees the
/// programs once every round has been delivered.
pub fn run<M: Clone, P: NodeProgram<Msg = M>>(
    net: &Network,
    programs: &mut [Option<P>],
    rounds: usize,
    record: bool,
    mut after_round: impl FnMut(usize, &[Option<P>]),
) -> RunLog<M> {
    assert_eq!(programs.len(), net.processes, "one program slot per process");
    let mut log = RunLog {
        receptions: vec![Vec::new(); if record { net.processes } else { 0 }],
        sends: vec![Vec::new(); if record { net.processes } else { 0 }],
    };
    for round in 0..rounds {
        let mut outgoing: Vec<BTreeMap<EdgeId, M>> = vec![BTreeMap::new(); net.processes];
        for (p, slot) in programs.iter_mut().enumerate() {
            if let Some(prog) = slot {
                let sent = prog.send(round);
                for (label, msg) in &sent {
                    outgoing[p].entry(*label).or_insert_with(|| msg.clone());
                }
                if record {
                    log.sends[p].push(sent);
                }
            } else if record {
                log.sends[p].push(Vec::new());
            }
        }
        let mut inboxes: Vec<Vec<(EdgeId, M)>> = vec![Vec::new(); net.processes];
        for ch in &net.channels {
            if let Some(msg) = outgoing[ch.sender].get(&ch.label) {
                for &r in &ch.receivers {
                    inboxes[r].push((ch.label, msg.clone()));
                }
            }
        }
        for (p, slot) in programs.iter_mut().enumerate() {
            let inbox = &mut inboxes[p];
            inbox.sort_by_key(|(label, _)| *label);
            if let Some(prog) = slot {
                prog.receive(round, inbox);
                if record {
                    log.receptions[p].extend(inbox.iter().map(|(edge, payload)| Reception { round, edge: *edge, payload: payload.clone() }));
                }
            }
        }
        after_round(round, programs);
    }
    log
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Echo {
        id: usize,
        heard: Vec<(usize, EdgeId, u32)>,
    }

    impl NodeProgram for Echo {
        type Msg = u32;

        fn send(&mut self, round: usize) -> Vec<(EdgeId, u32)> {
            // Two conflicting messages on the same label: the first wins.
            vec![(self.id, round as u32), (self.id, 99)]
        }

        fn receive(&mut self, round: usize, inbox: &[(EdgeId, u32)]) {
            self.heard.extend(inbox.iter().map(|&(e, m)| (round, e, m)));
        }
    }

    #[test]
    fn delivers_first_message_per_label_to_all_receivers() {
        let net = Network {
            processes: 3,
            channels: vec![Channel { label: 0, sender: 0, receivers: vec![1, 2] }, Channel { label: 2, sender: 2, receivers: vec![1] }],
        };
        let mut programs: Vec<Option<BoxedProgram<u32>>> =
            (0..3).map(|id| Some(Box::new(Echo { id, heard: vec![] }) as BoxedProgram<u32>)).collect();
        let log = run(&net, &mut programs, 2, true, |_, _| {});
        let got: Vec<(usize, EdgeId, u32)> = log.receptions[1].iter().map(|r| (r.round, r.edge, r.payload)).collect();
        assert_eq!(got, vec![(0, 0, 0), (0, 2, 0), (1, 0, 1), (1, 2, 1)]);
        assert_eq!(log.receptions[2].len(), 2);
        assert!(log.receptions[0].is_empty());
    }
}
