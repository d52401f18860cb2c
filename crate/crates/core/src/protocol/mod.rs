//! Round-based simulation of consensus over local multicast channels.

pub mod adversary;
pub mod algorithm;
pub mod engine;
pub mod flood;
pub mod necessity;

pub use adversary::{alternating_split, split_persona_adversary, AdversaryStrategy};
pub use algorithm::{disjoint_paths_with_value, step_c_construct, Algorithm1, ConsensusNode, PhasePlan, Protocol};
pub use engine::{BoxedProgram, Channel, Network, NodeProgram, Reception, RunLog};
pub use flood::{canonical_path, flood, value_along_path, FloodMessage, FloodRecord, Records, Trace};
pub use necessity::{build_necessity_executions, ExecutionView, NecessityReport};

use crate::error::{Error, Result};
use crate::hypergraph::{DirectedHypergraph, NodeId};
use crate::nodeset::NodeSet;
use crate::Bit;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// One consensus run: topology, fault budget, actual faulty set, inputs
/// and the behavior of the faulty nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    /// Inline hyperedge records, or a string in the text topology format.
    #[serde(deserialize_with = "graph_records_or_text")]
    pub graph: DirectedHypergraph,
    pub f: usize,
    #[serde(default)]
    pub faulty: NodeSet,
    pub inputs: BTreeMap<NodeId, Bit>,
    #[serde(default = "honest")]
    pub adversary: AdversaryStrategy,
    #[serde(default)]
    pub seed: u64,
}

fn honest() -> AdversaryStrategy {
    AdversaryStrategy::Honest
}

fn graph_records_or_text<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<DirectedHypergraph, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Source {
        Text(String),
        Records(DirectedHypergraph),
    }
    match Source::deserialize(d)? {
        Source::Text(t) => crate::format::parse(&t).map_err(serde::de::Error::custom),
        Source::Records(g) => Ok(g),
    }
}

impl Scenario {
    pub fn new(graph: DirectedHypergraph, f: usize, faulty: NodeSet, inputs: BTreeMap<NodeId, Bit>, adversary: AdversaryStrategy) -> Self {
        Scenario { graph, f, faulty, inputs, adversary, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.graph.nodes();
        if self.f >= self.graph.node_count() {
            return Err(Error::InvalidArgument(format!("f = {} needs more than {} nodes", self.f, self.graph.node_count())));
        }
        if !self.faulty.is_subset(v) {
            return Err(Error::InvalidArgument(format!("faulty set {} is not a subset of V = {v}", self.faulty)));
        }
        if self.faulty.len() > self.f {
            return Err(Error::InvalidArgument(format!("|F*| = {} exceeds f = {}", self.faulty.len(), self.f)));
        }
        let keys: NodeSet = self.inputs.keys().collect();
        if keys != v {
            return Err(Error::InvalidArgument(format!("inputs are given for {keys}, expected exactly {v}")));
        }
        if let Some((n, b)) = self.inputs.iter().find(|(_, &b)| b > 1) {
            return Err(Error::InvalidArgument(format!("input {b} of node {n} is not a bit")));
        }
        if let AdversaryStrategy::Constant { bit } = self.adversary {
            if bit > 1 {
                return Err(Error::InvalidArgument(format!("constant adversary bit {bit} is not a bit")));
            }
        }
        if let AdversaryStrategy::SplitPersona { split: Some(spec) } = &self.adversary {
            spec.validate(&self.graph, self.faulty)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub termination: bool,
    pub agreement: bool,
    pub validity: bool,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.termination && self.agreement && self.validity
    }
}

/// State of the non-faulty nodes at the end of one phase.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseSnapshot {
    pub fault_set: NodeSet,
    pub source: Option<NodeSet>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
    pub gamma: BTreeMap<NodeId, Bit>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub rounds: usize,
    /// Outputs of the non-faulty nodes.
    pub outputs: BTreeMap<NodeId, Bit>,
    pub phases: Vec<PhaseSnapshot>,
    pub verdict: Verdict,
    /// Phases after which a state left the set of states held at the
    /// phase start, or the `F = F*` phase ended without agreement.
    pub lemma_violations: Vec<String>,
}

impl RunReport {
    pub fn aborted_phases(&self) -> usize {
        self.phases.iter().filter(|p| p.diagnostic.is_some()).count()
    }
}

/// Runs the phase algorithm on `scenario` with phase-boundary instrumentation.
pub fn run_algorithm1(scenario: &Scenario) -> Result<RunReport> {
    scenario.validate()?;
    let g = &scenario.graph;
    let alg = Algorithm1::new(g, scenario.f);
    let honest_nodes = g.nodes() - scenario.faulty;
    let mut programs: Vec<Option<BoxedProgram<'static, FloodMessage>>> = (0..g.n()).map(|_| None).collect();
    for v in g.nodes() {
        let input = scenario.inputs[&v];
        programs[v] = Some(if scenario.faulty.contains(v) {
            let spawn = |b: Bit| alg.spawn(v, b);
            adversary::faulty_program(&scenario.adversary, g, scenario.faulty, v, input, &spawn)
        } else {
            alg.spawn(v, input)
        });
    }
    let per_phase = alg.rounds_per_phase();
    let rounds = alg.rounds();
    let mut phases = Vec::new();
    let mut violations = Vec::new();
    let mut start: BTreeMap<NodeId, Bit> = honest_nodes.iter().map(|v| (v, scenario.inputs[&v])).collect();
    engine::run(&Network::of(g), &mut programs, rounds, false, |round, progs| {
        if (round + 1) % per_phase != 0 {
            return;
        }
        let plan = &alg.phases()[round / per_phase];
        let gamma: BTreeMap<NodeId, Bit> =
            honest_nodes.iter().filter_map(|v| progs[v].as_ref().and_then(|p| p.state()).map(|b| (v, b))).collect();
        let before: BTreeSet<Bit> = start.values().copied().collect();
        if let Some((v, b)) = gamma.iter().find(|(_, b)| !before.contains(b)) {
            violations.push(format!("phase F = {}: node {v} holds {b}, held by no non-faulty node at the phase start", plan.fault_set));
        }
        if plan.fault_set == scenario.faulty && gamma.values().collect::<BTreeSet<_>>().len() > 1 {
            violations.push(format!("phase F = {} = F*: non-faulty states still differ", plan.fault_set));
        }
        phases.push(PhaseSnapshot { fault_set: plan.fault_set, source: plan.source, diagnostic: plan.diagnostic.clone(), gamma: gamma.clone() });
        start = gamma;
    });
    let outputs: BTreeMap<NodeId, Bit> =
        honest_nodes.iter().filter_map(|v| programs[v].as_ref().and_then(|p| p.state()).map(|b| (v, b))).collect();
    let honest_inputs: BTreeSet<Bit> = honest_nodes.iter().map(|v| scenario.inputs[&v]).collect();
    let verdict = Verdict {
        termination: outputs.len() == honest_nodes.len(),
        agreement: outputs.values().collect::<BTreeSet<_>>().len() <= 1,
        validity: outputs.values().all(|b| honest_inputs.contains(b)),
    };
    Ok(RunReport { rounds, outputs, phases, verdict, lemma_violations: violations })
}

/// Which dimensions of a scenario a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// Only the scenario itself.
    None,
    /// Every `F*` with `|F*| <= f`.
    FaultySets,
    /// Every input assignment.
    Inputs,
    /// Every strategy of the library.
    Adversaries,
    All,
}

/// The scenarios a sweep runs, in a fixed order.
pub fn sweep_scenarios(base: &Scenario, kind: SweepKind) -> Vec<Scenario> {
    let g = &base.graph;
    let vary_faulty = matches!(kind, SweepKind::FaultySets | SweepKind::All);
    let vary_inputs = matches!(kind, SweepKind::Inputs | SweepKind::All);
    let vary_adversary = matches!(kind, SweepKind::Adversaries | SweepKind::All);
    let faulty_sets = if vary_faulty { g.nodes().subsets_up_to(base.f) } else { vec![base.faulty] };
    let nodes = g.nodes().to_vec();
    let input_sets: Vec<BTreeMap<NodeId, Bit>> = if vary_inputs {
        (0u64..1 << nodes.len()).map(|m| nodes.iter().enumerate().map(|(i, &v)| (v, (m >> i & 1) as Bit)).collect()).collect()
    } else {
        vec![base.inputs.clone()]
    };
    let mut out = Vec::new();
    for &faulty in &faulty_sets {
        let adversaries = if !vary_adversary {
            vec![base.adversary.clone()]
        } else if faulty.is_empty() {
            vec![AdversaryStrategy::Honest]
        } else {
            AdversaryStrategy::library()
        };
        for adversary in &adversaries {
            // Inputs of faulty nodes only matter if their behavior reads them.
            let relevant = |inputs: &&BTreeMap<NodeId, Bit>| {
                !vary_inputs || !adversary.ignores_own_input() || faulty.iter().all(|v| inputs[&v] == 0)
            };
            for inputs in input_sets.iter().filter(relevant) {
                out.push(Scenario { graph: g.clone(), f: base.f, faulty, inputs: inputs.clone(), adversary: adversary.clone(), seed: base.seed });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepFailure {
    pub faulty: NodeSet,
    pub inputs: BTreeMap<NodeId, Bit>,
    pub adversary: String,
    pub verdict: Verdict,
    pub lemma_violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub runs: usize,
    pub passed: usize,
    /// Runs in which some phase found several source components.
    pub runs_with_aborted_phases: usize,
    pub lemma_violation_runs: usize,
    pub failures: Vec<SweepFailure>,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.runs && self.lemma_violation_runs == 0
    }
}

/// Runs every scenario of the sweep, in parallel on the current rayon pool.
pub fn run_sweep(base: &Scenario, kind: SweepKind) -> Result<SweepReport> {
    base.validate()?;
    let scenarios = sweep_scenarios(base, kind);
    let reports: Vec<RunReport> = scenarios.par_iter().map(run_algorithm1).collect::<Result<_>>()?;
    let mut summary = SweepReport { runs: reports.len(), passed: 0, runs_with_aborted_phases: 0, lemma_violation_runs: 0, failures: Vec::new() };
    for (s, r) in scenarios.iter().zip(&reports) {
        let clean = r.lemma_violations.is_empty();
        summary.passed += r.verdict.passed() as usize;
        summary.runs_with_aborted_phases += (r.aborted_phases() > 0) as usize;
        summary.lemma_violation_runs += !clean as usize;
        if !r.verdict.passed() || !clean {
            summary.failures.push(SweepFailure {
                faulty: s.faulty,
                inputs: s.inputs.clone(),
                adversary: s.adversary.name(),
                verdict: r.verdict,
                lemma_violations: r.lemma_violations.clone(),
            });
        }
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn scenario(g: DirectedHypergraph, faulty: NodeSet, inputs: &[Bit], adversary: AdversaryStrategy) -> Scenario {
        let inputs = g.nodes().iter().zip(inputs).map(|(v, &b)| (v, b)).collect();
        Scenario::new(g, 1, faulty, inputs, adversary)
    }

    #[test]
    fn k4_all_zero_inputs_decide_zero_under_every_adversary() {
        let g = fixtures::complete_p2p(4).unwrap();
        for faulty in g.nodes().subsets_up_to(1) {
            for adversary in AdversaryStrategy::library() {
                let r = run_algorithm1(&scenario(g.clone(), faulty, &[0, 0, 0, 0], adversary)).unwrap();
                assert!(r.outputs.values().all(|&b| b == 0), "F* = {faulty}: {:?}", r.outputs);
                assert!(r.lemma_violations.is_empty());
            }
        }
    }

    #[test]
    fn k4_equivocation_is_survived() {
        let g = fixtures::complete_p2p(4).unwrap();
        let s = scenario(g, NodeSet::singleton(2), &[0, 1, 0, 1], AdversaryStrategy::SplitPersona { split: None });
        let r = run_algorithm1(&s).unwrap();
        assert!(r.verdict.passed(), "{r:?}");
        assert_eq!(r.phases.len(), 5);
        assert_eq!(r.rounds, 40);
    }

    #[test]
    fn full_sweeps_pass_on_condition_passing_fixtures() {
        for g in [fixtures::complete_p2p(4).unwrap(), fixtures::cycle_local_broadcast(4).unwrap()] {
            let base = scenario(g, NodeSet::empty(), &[0, 0, 0, 0], AdversaryStrategy::Honest);
            let report = run_sweep(&base, SweepKind::All).unwrap();
            assert!(report.all_passed(), "{:?}", report.failures.first());
            assert_eq!(report.runs_with_aborted_phases, 0);
        }
    }

    #[test]
    fn sweep_sizes() {
        let g = fixtures::complete_p2p(4).unwrap();
        let base = scenario(g, NodeSet::empty(), &[0, 1, 0, 1], AdversaryStrategy::Honest);
        assert_eq!(sweep_scenarios(&base, SweepKind::None).len(), 1);
        assert_eq!(sweep_scenarios(&base, SweepKind::FaultySets).len(), 5);
        assert_eq!(sweep_scenarios(&base, SweepKind::Inputs).len(), 16);
        assert_eq!(sweep_scenarios(&base, SweepKind::Adversaries).len(), 1);
        // F* = {}: 16 runs; each singleton: honest and flip with 16 inputs, 4 others with 8.
        assert_eq!(sweep_scenarios(&base, SweepKind::All).len(), 16 + 4 * (2 * 16 + 4 * 8));
    }

    #[test]
    fn multiple_sources_abort_the_phase() {
        let g = DirectedHypergraph::new(3).unwrap();
        let r = run_algorithm1(&scenario(g, NodeSet::empty(), &[0, 1, 1], AdversaryStrategy::Honest)).unwrap();
        assert_eq!(r.aborted_phases(), 4);
        assert!(r.phases[0].diagnostic.as_deref().unwrap().contains("3 source components"));
        assert!(!r.verdict.agreement);
    }

    #[test]
    fn validation_rejects_bad_scenarios() {
        let g = fixtures::complete_p2p(4).unwrap();
        let ok = scenario(g.clone(), NodeSet::singleton(1), &[0, 1, 0, 1], AdversaryStrategy::Silent);
        ok.validate().unwrap();
        let mut too_many = ok.clone();
        too_many.faulty = NodeSet::from_iter([1, 2]);
        assert!(too_many.validate().is_err());
        let mut missing = ok.clone();
        missing.inputs.remove(&3);
        assert!(missing.validate().is_err());
        let mut not_bit = ok.clone();
        not_bit.inputs.insert(0, 2);
        assert!(not_bit.validate().is_err());
        let mut big_f = ok;
        big_f.f = 4;
        assert!(big_f.validate().is_err());
    }

    #[test]
    fn scenario_documents() {
        let g = fixtures::complete_p2p(4).unwrap();
        let s = scenario(g.clone(), NodeSet::singleton(3), &[1, 0, 1, 0], AdversaryStrategy::Constant { bit: 1 });
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), s);

        let doc = serde_json::json!({
            "graph": crate::format::serialize(&g),
            "f": 1,
            "faulty": [3],
            "inputs": {"0": 1, "1": 0, "2": 1, "3": 0},
            "adversary": {"kind": "constant", "bit": 1}
        });
        assert_eq!(serde_json::from_value::<Scenario>(doc).unwrap(), s);
    }

    #[test]
    fn reports_are_deterministic() {
        let g = fixtures::cycle_local_broadcast(4).unwrap();
        let s = scenario(g, NodeSet::singleton(0), &[1, 0, 0, 1], AdversaryStrategy::FlipForwarding);
        let a = serde_json::to_string(&run_algorithm1(&s).unwrap()).unwrap();
        let b = serde_json::to_string(&run_algorithm1(&s).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
