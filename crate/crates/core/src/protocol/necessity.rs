//! The indistinguishability construction behind the necessity of LCR-hyper.
//!
//! From a violating split `G'` and partition `(L, C, R)`, a network `𝒢`
//! holds up to three copies of every node of `G'`. One execution `Σ` on
//! `𝒢` then simulates three executions of the same algorithm on `G'`:
//! `E1` (all honest inputs 0), `E2` (all honest inputs 1) and `E3` (faulty
//! set `F'`), in which the nodes of `L - F'` cannot tell `E1` from `E3` and
//! the nodes of `R - F'` cannot tell `E2` from `E3`.

use super::algorithm::Protocol;
use super::engine::{self, BoxedProgram, Channel, Network, NodeProgram};
use crate::conditions::{verify_witness, Partition, Witness};
use crate::error::{Error, Result};
use crate::hypergraph::{DirectedHypergraph, EdgeId, NodeId};
use crate::nodeset::NodeSet;
use crate::splitting::{split, SplitHypergraph};
use crate::Bit;
use serde::Serialize;
use std::collections::BTreeMap;

/// One execution on `G'` as seen by its nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecutionView {
    pub faulty: NodeSet,
    /// Inputs of the non-faulty nodes.
    pub inputs: BTreeMap<NodeId, Bit>,
    pub outputs: BTreeMap<NodeId, Bit>,
    /// Serialized reception log of every non-faulty node.
    pub logs: BTreeMap<NodeId, String>,
    /// The copy of `𝒢` that models each node.
    pub model: BTreeMap<NodeId, (NodeId, usize)>,
}

impl ExecutionView {
    fn honest_outputs_on(&self, s: NodeSet) -> impl Iterator<Item = Bit> + '_ {
        s.iter().filter_map(|v| self.outputs.get(&v).copied())
    }

    /// Every honest output equals the common honest input.
    pub fn valid_for(&self, input: Bit) -> bool {
        self.outputs.values().all(|&o| o == input)
    }

    pub fn agreement(&self) -> bool {
        self.outputs.values().all(|&o| Some(&o) == self.outputs.values().next())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessityReport {
    pub fault_set: NodeSet,
    /// The partition after `C ∩ F'` is moved into `L`.
    pub l: NodeSet,
    pub c: NodeSet,
    pub r: NodeSet,
    /// Copies of `𝒢`: `(node of G', copy index, Σ input)`.
    pub copies: Vec<(NodeId, usize, Bit)>,
    pub e1: ExecutionView,
    pub e2: ExecutionView,
    pub e3: ExecutionView,
    /// Every honest node of every `E_k` saw exactly what its copy saw in `Σ`.
    pub views_match_sigma: bool,
    /// `E1 ≡ E3` on `L - F'`.
    pub left_views_match: bool,
    /// `E2 ≡ E3` on `R - F'`.
    pub right_views_match: bool,
    pub e1_valid: bool,
    pub e2_valid: bool,
    pub e3_agreement: bool,
    /// Some node of `L - F'` outputs 0 and some node of `R - F'` outputs 1 in `E3`.
    pub e3_split: bool,
}

impl NecessityReport {
    /// No algorithm can be valid in `E1` and `E2` and agree in `E3`.
    pub fn trilemma(&self) -> bool {
        !(self.e1_valid && self.e2_valid && self.e3_agreement)
    }

    pub fn views_consistent(&self) -> bool {
        self.views_match_sigma && self.left_views_match && self.right_views_match
    }
}

/// Copy classes of the nodes of `G'`.
struct Layout {
    /// Σ inputs of each node's copies, by copy index.
    inputs: BTreeMap<NodeId, Vec<Bit>>,
    /// `model[k][v]`: the copy index modelling `v` in execution `E_{k+1}`.
    model: [BTreeMap<NodeId, usize>; 3],
    faulty: [NodeSet; 3],
}

fn layout(h: &DirectedHypergraph, fp: NodeSet, l: NodeSet, c: NodeSet, r: NodeSet) -> Result<Layout> {
    let n_l = h.in_neighborhood(l, r - fp)?;
    let n_r = h.in_neighborhood(r, l - fp)?;
    let nc_l = h.in_neighborhood(c, l - fp)?;
    let nc_r = h.in_neighborhood(c, r - fp)?;
    let c_prime = c - nc_l - nc_r;
    let mut inputs = BTreeMap::new();
    let mut model: [BTreeMap<NodeId, usize>; 3] = Default::default();
    for v in h.nodes() {
        let (ins, m): (Vec<Bit>, [usize; 3]) = if n_l.contains(v) {
            (vec![0], [0, 0, 0])
        } else if n_r.contains(v) || (nc_l & nc_r).contains(v) {
            (vec![1], [0, 0, 0])
        } else if c_prime.contains(v) {
            (vec![0, 1, 1], [0, 1, 2])
        } else if l.contains(v) || nc_l.contains(v) {
            (vec![0, 1], [0, 1, 0])
        } else {
            (vec![0, 1], [0, 1, 1])
        };
        inputs.insert(v, ins);
        for k in 0..3 {
            model[k].insert(v, m[k]);
        }
    }
    let faulty = [h.in_neighborhood(r | c, l - fp)?, h.in_neighborhood(l | c, r - fp)?, fp];
    Ok(Layout { inputs, model, faulty })
}

struct Replay<M> {
    sends: Vec<Vec<(EdgeId, M)>>,
}

impl<M: Clone> NodeProgram for Replay<M> {
    type Msg = M;

    fn send(&mut self, round: usize) -> Vec<(EdgeId, M)> {
        self.sends.get(round).cloned().unwrap_or_default()
    }

    fn receive(&mut self, _round: usize, _inbox: &[(EdgeId, M)]) {}
}

fn serialize_log<M: Serialize>(log: &[engine::Reception<M>]) -> Result<String> {
    serde_json::to_string(log).map_err(|e| Error::Protocol(format!("cannot serialize reception log: {e}")))
}

/// Builds `𝒢`, runs `Σ` with `protocol` instantiated on `G'`, and replays
/// `E1`, `E2`, `E3` on `G'` with faulty nodes copying their model in `Σ`.
pub fn build_necessity_executions<P, B>(g: &DirectedHypergraph, f: usize, witness: &Witness, build: B) -> Result<NecessityReport>
where
    P: Protocol,
    P::Msg: 'static,
    B: Fn(&SplitHypergraph) -> P,
{
    let Partition::Lcr { l, c, r } = witness.partition else {
        return Err(Error::MalformedWitness("the necessity construction needs an (L, C, R) partition".into()));
    };
    if !verify_witness(g, f, witness)? {
        return Err(Error::MalformedWitness("the witness does not violate LCR-hyper".into()));
    }
    let gp = split(g, witness.fault_set, &witness.split)?;
    let h = gp.graph();
    let fp = gp.f_prime();
    let (l, c) = (l | (c & fp), c - fp);
    let lay = layout(h, fp, l, c, r)?;

    let mut index: BTreeMap<(NodeId, usize), usize> = BTreeMap::new();
    let mut copies = Vec::new();
    for (&v, ins) in &lay.inputs {
        for (i, &b) in ins.iter().enumerate() {
            index.insert((v, i), copies.len());
            copies.push((v, i, b));
        }
    }

    // Which copy of each in-neighbor feeds a given copy.
    let arcs = h.underlying_graph();
    let mut source: BTreeMap<(usize, NodeId), usize> = BTreeMap::new();
    for (x, &(v, i, _)) in copies.iter().enumerate() {
        let governing = (0..3)
            .find(|&k| !lay.faulty[k].contains(v) && lay.model[k][&v] == i)
            .or_else(|| (0..3).find(|&k| lay.model[k][&v] == i))
            .unwrap_or(0);
        for u in arcs.in_neighbors(v) {
            source.insert((x, u), lay.model[governing][&u]);
        }
    }
    for k in 0..3 {
        for v in h.nodes() - lay.faulty[k] {
            let x = index[&(v, lay.model[k][&v])];
            for u in arcs.in_neighbors(v) {
                if source[&(x, u)] != lay.model[k][&u] {
                    return Err(Error::Protocol(format!(
                        "copy ({v}, {}) cannot be fed consistently from {u} in execution E{}",
                        lay.model[k][&v],
                        k + 1
                    )));
                }
            }
        }
    }

    let mut channels = Vec::new();
    for e in h.edges() {
        for (y, &(u, j, _)) in copies.iter().enumerate() {
            if u != e.head {
                continue;
            }
            let receivers: Vec<usize> = copies
                .iter()
                .enumerate()
                .filter(|(x, &(v, _, _))| e.tails.contains(v) && source[&(*x, u)] == j)
                .map(|(x, _)| x)
                .collect();
            if !receivers.is_empty() {
                channels.push(Channel { label: e.id, sender: y, receivers });
            }
        }
    }
    let sigma_net = Network { processes: copies.len(), channels };
    let protocol = build(&gp);
    let rounds = protocol.rounds();
    let mut sigma_programs: Vec<Option<BoxedProgram<'static, P::Msg>>> =
        copies.iter().map(|&(v, _, b)| Some(protocol.spawn(v, b))).collect();
    let sigma = engine::run(&sigma_net, &mut sigma_programs, rounds, true, |_, _| {});
    let sigma_outputs: Vec<Option<Bit>> = sigma_programs.iter().map(|p| p.as_ref().and_then(|p| p.state())).collect();

    let net = Network::of(h);
    let mut views_match_sigma = true;
    let mut views = Vec::new();
    for k in 0..3 {
        let model_of = |v: NodeId| index[&(v, lay.model[k][&v])];
        let mut programs: Vec<Option<BoxedProgram<'static, P::Msg>>> = (0..h.n()).map(|_| None).collect();
        let mut inputs = BTreeMap::new();
        for v in h.nodes() {
            let x = model_of(v);
            programs[v] = Some(if lay.faulty[k].contains(v) {
                Box::new(Replay { sends: sigma.sends[x].clone() })
            } else {
                inputs.insert(v, copies[x].2);
                protocol.spawn(v, copies[x].2)
            });
        }
        let run = engine::run(&net, &mut programs, rounds, true, |_, _| {});
        let mut view = ExecutionView {
            faulty: lay.faulty[k],
            inputs,
            outputs: BTreeMap::new(),
            logs: BTreeMap::new(),
            model: h.nodes().iter().map(|v| (v, (v, lay.model[k][&v]))).collect(),
        };
        for v in h.nodes() - lay.faulty[k] {
            let x = model_of(v);
            let log = serialize_log(&run.receptions[v])?;
            views_match_sigma &= log == serialize_log(&sigma.receptions[x])?;
            if let Some(o) = programs[v].as_ref().and_then(|p| p.state()) {
                view.outputs.insert(v, o);
                views_match_sigma &= sigma_outputs[x] == Some(o);
            }
            view.logs.insert(v, log);
        }
        views.push(view);
    }
    let [e1, e2, e3]: [ExecutionView; 3] = views.try_into().expect("three executions");
    let same_on = |a: &ExecutionView, b: &ExecutionView, s: NodeSet| s.iter().all(|v| a.logs.get(&v) == b.logs.get(&v) && a.logs.contains_key(&v));
    let left_views_match = same_on(&e1, &e3, l - fp);
    let right_views_match = same_on(&e2, &e3, r - fp);
    let e3_split = e3.honest_outputs_on(l - fp).any(|o| o == 0) && e3.honest_outputs_on(r - fp).any(|o| o == 1);
    Ok(NecessityReport {
        fault_set: witness.fault_set,
        l,
        c,
        r,
        copies,
        e1_valid: e1.valid_for(0),
        e2_valid: e2.valid_for(1),
        e3_agreement: e3.agreement(),
        e3_split,
        views_match_sigma,
        left_views_match,
        right_views_match,
        e1,
        e2,
        e3,
    })
}
