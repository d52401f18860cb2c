//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Runs without the libtest harness so the lines are never
//! captured.

mod common;

use common::{brute_force_disjoint, source_lemmas};
use hyperconsensus::conditions::{check_ab_hyper, check_lcr_hyper, count_disjoint_uv_paths, ConditionReport};
use hyperconsensus::protocol::{build_necessity_executions, run_algorithm1, run_sweep, Algorithm1, Scenario, SweepKind};
use hyperconsensus::reductions::{check_undirected_hypergraph_conditions, counterexample_hypergraph, crossval_class, hyper_k_connected, ModelClass};
use hyperconsensus::{fixtures, DirectedHypergraph, NodeSet, SimpleDigraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

const CONDITION_BUDGET: Duration = Duration::from_secs(5 * 60);
const ALGORITHM_BUDGET: Duration = Duration::from_secs(10 * 60);
const COUNTEREXAMPLE_BUDGET: Duration = Duration::from_secs(60);
const RANDOM_CONDITION_INSTANCES: usize = 2000;
const MENGER_INSTANCES: usize = 600;
const RANDOM_PASSING_GRAPHS: usize = 20;
const RANDOM_VIOLATING_GRAPHS: usize = 6;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Every `(head, tails)` shape on `n` nodes, ordered by head then tail bits.
fn edge_universe(n: usize) -> Vec<(usize, NodeSet)> {
    let mut shapes = Vec::new();
    for head in 0..n {
        let others = NodeSet::full(n) - NodeSet::singleton(head);
        for tails in others.subsets() {
            if !tails.is_empty() {
                shapes.push((head, tails));
            }
        }
    }
    shapes.sort_by_key(|&(h, t)| (h, t.bits()));
    shapes
}

fn from_shapes(n: usize, shapes: &[(usize, NodeSet)]) -> DirectedHypergraph {
    let mut g = DirectedHypergraph::new(n).unwrap();
    for &(h, t) in shapes {
        g.add_edge(h, t).unwrap();
    }
    g
}

/// Subsets of `universe` with at most `k` members.
fn small_subsets<T: Copy>(universe: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![(Vec::new(), 0usize)];
    while let Some((chosen, start)) = frontier.pop() {
        if chosen.len() == k {
            continue;
        }
        for (i, &item) in universe.iter().enumerate().skip(start) {
            let mut next: Vec<T> = chosen.clone();
            next.push(item);
            out.push(next.clone());
            frontier.push((next, i + 1));
        }
    }
    out
}

/// The exhaustive family for n <= 4: every hypergraph on 2 or 3 nodes, and
/// on 4 nodes every hypergraph with at most 4 hyperedges plus every subset
/// of each 8-shape window of the universe.
fn exhaustive_family() -> Vec<DirectedHypergraph> {
    let mut family = Vec::new();
    for n in 2..=3 {
        let universe = edge_universe(n);
        for mask in 0u32..(1 << universe.len()) {
            let chosen: Vec<_> = universe.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s).collect();
            family.push(from_shapes(n, &chosen));
        }
    }
    let universe = edge_universe(4);
    for chosen in small_subsets(&universe, 4) {
        family.push(from_shapes(4, &chosen));
    }
    for window in universe.chunks(4).collect::<Vec<_>>().windows(2) {
        let shapes: Vec<_> = window.concat();
        for mask in 0u32..(1 << shapes.len()) {
            if mask.count_ones() > 4 {
                let chosen: Vec<_> = shapes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &s)| s).collect();
                family.push(from_shapes(4, &chosen));
            }
        }
    }
    family
}

fn condition_equivalence() -> Outcome {
    let start = Instant::now();
    let family = exhaustive_family();
    let mut cases: Vec<(DirectedHypergraph, usize)> =
        family.iter().flat_map(|g| (0..=2).filter(|&f| f < g.node_count()).map(move |f| (g.clone(), f))).collect();
    let exhaustive = cases.len();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..RANDOM_CONDITION_INSTANCES as u64 {
        let n = rng.gen_range(3..=6);
        let edges = rng.gen_range(n..=3 * n);
        let f = rng.gen_range(0..=2usize.min(n - 1));
        cases.push((fixtures::random(n, edges, seed).unwrap(), f));
    }
    let disagreements: Vec<String> = cases
        .par_iter()
        .filter_map(|(g, f)| {
            let lcr = check_lcr_hyper(g, *f).unwrap().holds;
            let ab = check_ab_hyper(g, *f).unwrap().holds;
            (lcr != ab).then(|| format!("f = {f}: {g:?}"))
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        disagreements.is_empty() && elapsed <= CONDITION_BUDGET,
        format!(
            "{exhaustive} exhaustive + {RANDOM_CONDITION_INSTANCES} random (G, f) pairs, {} disagreements, {:.1}s (budget {}s)",
            disagreements.len(),
            elapsed.as_secs_f64(),
            CONDITION_BUDGET.as_secs()
        ),
    )
}

fn menger_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut disagreements = 0;
    for _ in 0..MENGER_INSTANCES {
        let n = rng.gen_range(2..=6);
        let density = rng.gen_range(0.2..0.8);
        let mut d = SimpleDigraph::new(n).unwrap();
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(density) {
                    d.add_arc(u, v).unwrap();
                }
            }
        }
        let g = DirectedHypergraph::point_to_point(&d).unwrap();
        let v = rng.gen_range(0..n);
        let rest = NodeSet::full(n) - NodeSet::singleton(v);
        let u: NodeSet = rest.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let excluded: NodeSet = (rest - u).iter().filter(|_| rng.gen_bool(0.3)).collect();
        if count_disjoint_uv_paths(&g, u, v, excluded).unwrap() != brute_force_disjoint(&d, u, v, excluded) {
            disagreements += 1;
        }
    }
    outcome(disagreements == 0, format!("{MENGER_INSTANCES} random digraphs (n <= 6), {disagreements} disagreements"))
}

fn reductions() -> Outcome {
    let mut rows = Vec::new();
    let mut total = 0;
    for (class, n_max, name) in [(ModelClass::P2p, 4, "p2p"), (ModelClass::Local, 5, "local"), (ModelClass::Undirected, 5, "undirected")] {
        let s = crossval_class(class, n_max, 1).unwrap();
        let instances: u64 = s.rows.iter().map(|r| r.instances).sum();
        total += s.disagreements;
        rows.push(format!("{name} n <= {n_max}: {instances} instances, {} disagreements", s.disagreements));
    }
    let holds = |g: DirectedHypergraph| check_lcr_hyper(&g, 1).unwrap().holds;
    let fixed = [
        holds(fixtures::complete_p2p(4).unwrap()),
        !holds(fixtures::complete_p2p(3).unwrap()),
        holds(fixtures::cycle_local_broadcast(4).unwrap()),
        !holds(fixtures::path_local_broadcast(3).unwrap()),
    ];
    outcome(
        total == 0 && fixed.iter().all(|&b| b),
        format!("{}; K4 holds, K3 violated, C4 broadcast holds, P3 broadcast violated: {fixed:?}", rows.join("; ")),
    )
}

/// Random hypergraphs alternating 5 and 6 nodes with 2n..2n+4 hyperedges
/// on which the condition for `f = 1` holds.
fn random_passing_graphs(count: usize) -> Vec<DirectedHypergraph> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let n = if out.len() % 2 == 0 { 5 } else { 6 };
        let g = fixtures::random(n, 2 * n + (seed % 5) as usize, seed).unwrap();
        if check_lcr_hyper(&g, 1).unwrap().holds {
            out.push(g);
        }
        seed += 1;
    }
    out
}

fn algorithm_instances() -> Vec<(String, DirectedHypergraph)> {
    let mut out = vec![
        ("K4 p2p".to_string(), fixtures::complete_p2p(4).unwrap()),
        ("C4 local broadcast".to_string(), fixtures::cycle_local_broadcast(4).unwrap()),
    ];
    for (i, g) in random_passing_graphs(RANDOM_PASSING_GRAPHS).into_iter().enumerate() {
        out.push((format!("random #{i} (n = {})", g.node_count()), g));
    }
    out
}

fn base_scenario(g: &DirectedHypergraph) -> Scenario {
    let inputs = g.nodes().iter().map(|v| (v, 0)).collect();
    Scenario::new(g.clone(), 1, NodeSet::empty(), inputs, hyperconsensus::protocol::AdversaryStrategy::Honest)
}

fn algorithm_correctness(instances: &[(String, DirectedHypergraph)]) -> Outcome {
    let start = Instant::now();
    let (mut runs, mut failed, mut lemma_runs, mut aborted) = (0, 0, 0, 0);
    let mut failing = Vec::new();
    for (name, g) in instances {
        let report = run_sweep(&base_scenario(g), SweepKind::All).unwrap();
        runs += report.runs;
        failed += report.runs - report.passed;
        lemma_runs += report.lemma_violation_runs;
        aborted += report.runs_with_aborted_phases;
        if !report.all_passed() {
            failing.push(name.clone());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failing.is_empty() && lemma_runs == 0 && aborted == 0 && elapsed <= ALGORITHM_BUDGET,
        format!(
            "{} instances, {runs} runs, {failed} failed, {lemma_runs} with lemma violations, {aborted} with aborted phases, {:.1}s (budget {}s){}",
            instances.len(),
            elapsed.as_secs_f64(),
            ALGORITHM_BUDGET.as_secs(),
            if failing.is_empty() { String::new() } else { format!("; failing: {}", failing.join(", ")) }
        ),
    )
}

fn source_component_lemmas(instances: &[(String, DirectedHypergraph)]) -> Outcome {
    let failures: Vec<String> =
        instances.iter().filter_map(|(name, g)| source_lemmas(g, 1).err().map(|e| format!("{name}: {e}"))).collect();
    let fault_sets: usize = instances.iter().map(|(_, g)| g.nodes().subsets_up_to(1).len()).sum();
    outcome(failures.is_empty(), format!("{} instances, {fault_sets} fault sets, {} failures {failures:?}", instances.len(), failures.len()))
}

/// Graphs where the condition holds without faults but fails for one, with
/// a witness that splits a node.
fn random_violating_graphs(count: usize) -> Vec<(DirectedHypergraph, ConditionReport)> {
    let mut out = Vec::new();
    let mut seed = 1000u64;
    while out.len() < count {
        let n = 3 + (seed % 3) as usize;
        let g = fixtures::random(n, n + (seed % 4) as usize, seed).unwrap();
        seed += 1;
        if !check_lcr_hyper(&g, 0).unwrap().holds {
            continue;
        }
        let report = check_lcr_hyper(&g, 1).unwrap();
        if report.witness.as_ref().is_some_and(|w| !w.split.split_set.is_empty()) {
            out.push((g, report));
        }
    }
    out
}

fn necessity() -> Outcome {
    let mut cases = vec![("K3 p2p".to_string(), fixtures::complete_p2p(3).unwrap())];
    cases.extend(random_violating_graphs(RANDOM_VIOLATING_GRAPHS).into_iter().enumerate().map(|(i, (g, _))| (format!("random #{i}"), g)));
    let mut bad = Vec::new();
    for (name, g) in &cases {
        let witness = check_lcr_hyper(g, 1).unwrap().witness.unwrap();
        let report = build_necessity_executions(g, 1, &witness, |gp| Algorithm1::new(gp.graph(), 1)).unwrap();
        if !(report.views_consistent() && report.trilemma() && report.e3_split) {
            bad.push(format!(
                "{name}: views {} trilemma {} split {}",
                report.views_consistent(),
                report.trilemma(),
                report.e3_split
            ));
        }
    }
    outcome(
        bad.is_empty(),
        format!("{} violating instances ({} with a split witness), checked views, trilemma and split E3 outputs; failures: {bad:?}", cases.len(), cases.len() - 1),
    )
}

fn counterexamples() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for f in [3, 4] {
        let g = counterexample_hypergraph(f).unwrap();
        let n = g.node_count();
        let k = 3 * f + 1 - n;
        let c3 = check_undirected_hypergraph_conditions(&g, f).unwrap().c3;
        let connected = hyper_k_connected(&g, 3, f, k).unwrap();
        pass &= c3 && !connected;
        parts.push(format!("f = {f} (n = {n}): condition 3 {c3}, (3, {f})-hyper-{k}-connected {connected}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed <= COUNTEREXAMPLE_BUDGET;
    outcome(pass, format!("{}; {:.1}s (budget {}s)", parts.join("; "), elapsed.as_secs_f64(), COUNTEREXAMPLE_BUDGET.as_secs()))
}

fn determinism(instances: &[(String, DirectedHypergraph)]) -> Outcome {
    let twice = |f: &dyn Fn() -> String| f() == f();
    let mut checks = Vec::new();
    for (_, g) in instances.iter().take(4) {
        checks.push(twice(&|| serde_json::to_string(&check_lcr_hyper(g, 1).unwrap()).unwrap()));
        checks.push(twice(&|| serde_json::to_string(&check_ab_hyper(g, 1).unwrap()).unwrap()));
        let mut s = base_scenario(g);
        s.faulty = NodeSet::singleton(g.nodes().min().unwrap());
        s.adversary = hyperconsensus::protocol::AdversaryStrategy::SplitPersona { split: None };
        s.inputs = g.nodes().iter().map(|v| (v, (v % 2) as u8)).collect::<BTreeMap<_, _>>();
        checks.push(twice(&|| serde_json::to_string(&run_algorithm1(&s).unwrap()).unwrap()));
        checks.push(twice(&|| serde_json::to_string(&run_sweep(&s, SweepKind::Adversaries).unwrap()).unwrap()));
    }
    let k3 = fixtures::complete_p2p(3).unwrap();
    let w = check_lcr_hyper(&k3, 1).unwrap().witness.unwrap();
    checks.push(twice(&|| serde_json::to_string(&build_necessity_executions(&k3, 1, &w, |gp| Algorithm1::new(gp.graph(), 1)).unwrap()).unwrap()));
    checks.push(twice(&|| serde_json::to_string(&crossval_class(ModelClass::P2p, 3, 1).unwrap()).unwrap()));
    let same = checks.iter().filter(|&&b| b).count();
    outcome(same == checks.len(), format!("{same}/{} repeated reports byte-identical", checks.len()))
}

fn main() {
    let instances = algorithm_instances();
    let criteria: Vec<Criterion> = vec![
        ("condition equivalence", Box::new(condition_equivalence)),
        ("menger oracle", Box::new(menger_oracle)),
        ("reductions", Box::new(reductions)),
        ("algorithm correctness", Box::new(|| algorithm_correctness(&instances))),
        ("source-component lemmas", Box::new(|| source_component_lemmas(&instances))),
        ("necessity executions", Box::new(necessity)),
        ("counterexample", Box::new(counterexamples)),
        ("determinism", Box::new(|| determinism(&instances))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
