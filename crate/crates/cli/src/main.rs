//! `hyperconsensus`: condition audits, consensus simulation, topology
//! generators and reduction cross-validation.
//!
//! Exit codes: 0 success (condition holds, every run passed, no
//! disagreement); 2 negative verdict (condition violated, some run failed,
//! some disagreement); 1 usage, I/O or parse error.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperconsensus::conditions::{check_ab_hyper, check_lcr_hyper, ConditionReport};
use hyperconsensus::protocol::{run_algorithm1, run_sweep, Scenario, SweepKind};
use hyperconsensus::reductions::{counterexample_hypergraph, crossval_class, ModelClass};
use hyperconsensus::{fixtures, format, DirectedHypergraph};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hyperconsensus", version, about = "Byzantine consensus over local multicast channels")]
struct Cli {
    /// Emit a JSON document instead of the text report.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for sweeps and cross-validation.
    #[arg(long, global = true, env = "HYPERCONSENSUS_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a topology against the tight condition for `f` faults.
    Check {
        path: PathBuf,
        #[arg(long)]
        f: usize,
        #[arg(long, value_enum, default_value_t = ConditionArg::Auto)]
        condition: ConditionArg,
    },
    /// Run the consensus algorithm on a scenario file, optionally sweeping it.
    Simulate {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = SweepArg::None)]
        sweep: SweepArg,
        /// Overrides the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write a topology in the text format.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
        /// Output file; stdout if absent.
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
    /// Compare the general checker with the classical model criteria on every
    /// instance of a model class.
    Crossval {
        #[arg(long, value_enum)]
        class: ClassArg,
        #[arg(long)]
        n_max: usize,
        #[arg(long)]
        f: usize,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Point-to-point complete graph.
    CompleteP2p(Size),
    /// Undirected cycle, every node broadcasting to both neighbors.
    CycleLocalBroadcast(Size),
    /// Undirected path, every node broadcasting to its neighbors.
    PathLocalBroadcast(Size),
    Figure1a,
    Figure1b,
    /// Undirected hypergraph showing that hyper-k-connectivity is not enough.
    Counterexample {
        #[arg(long)]
        f: usize,
    },
    /// Both channel sets on a common node set.
    Union { first: PathBuf, second: PathBuf },
    /// Random hyperedges with random non-empty tail sets.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        edges: usize,
        #[arg(long)]
        seed: u64,
    },
}

#[derive(Args)]
struct Size {
    #[arg(long)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Lcr,
    Ab,
    Auto,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    None,
    FaultySets,
    Inputs,
    Adversaries,
    All,
}

impl From<SweepArg> for SweepKind {
    fn from(s: SweepArg) -> Self {
        match s {
            SweepArg::None => SweepKind::None,
            SweepArg::FaultySets => SweepKind::FaultySets,
            SweepArg::Inputs => SweepKind::Inputs,
            SweepArg::Adversaries => SweepKind::Adversaries,
            SweepArg::All => SweepKind::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    P2p,
    Local,
    Undirected,
}

impl From<ClassArg> for ModelClass {
    fn from(c: ClassArg) -> Self {
        match c {
            ClassArg::P2p => ModelClass::P2p,
            ClassArg::Local => ModelClass::Local,
            ClassArg::Undirected => ModelClass::Undirected,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_topology(path: &Path) -> Result<DirectedHypergraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    format::parse(&text).with_context(|| format!("{}", path.display()))
}

fn emit_json(value: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Returns whether the verdict is positive.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Check { path, f, condition } => {
            let g = read_topology(path)?;
            let report: ConditionReport = match condition {
                ConditionArg::Lcr | ConditionArg::Auto => check_lcr_hyper(&g, *f)?,
                ConditionArg::Ab => check_ab_hyper(&g, *f)?,
            };
            if cli.json {
                emit_json(&report)?;
            } else {
                print!("{}", report.render(&g));
            }
            Ok(report.holds)
        }
        Command::Simulate { scenario, sweep, seed } => {
            let text = std::fs::read_to_string(scenario).with_context(|| format!("cannot read {}", scenario.display()))?;
            let mut s: Scenario = serde_json::from_str(&text).with_context(|| format!("invalid scenario {}", scenario.display()))?;
            if let Some(seed) = seed {
                s.seed = *seed;
            }
            s.validate()?;
            match SweepKind::from(*sweep) {
                SweepKind::None => {
                    let report = run_algorithm1(&s)?;
                    if cli.json {
                        emit_json(&report)?;
                    } else {
                        print_run(&report);
                    }
                    Ok(report.verdict.passed() && report.lemma_violations.is_empty())
                }
                kind => {
                    let report = run_sweep(&s, kind)?;
                    if cli.json {
                        emit_json(&report)?;
                    } else {
                        println!("runs: {}", report.runs);
                        println!("passed: {}", report.passed);
                        println!("runs with aborted phases: {}", report.runs_with_aborted_phases);
                        println!("runs with lemma violations: {}", report.lemma_violation_runs);
                        for fail in report.failures.iter().take(20) {
                            let inputs: String = fail.inputs.values().map(|b| b.to_string()).collect();
                            println!(
                                "FAIL F* = {} inputs = {inputs} adversary = {} agreement = {} validity = {}",
                                fail.faulty, fail.adversary, fail.verdict.agreement, fail.verdict.validity
                            );
                            for v in &fail.lemma_violations {
                                println!("  {v}");
                            }
                        }
                        if report.failures.len() > 20 {
                            println!("... {} more failing runs", report.failures.len() - 20);
                        }
                    }
                    Ok(report.all_passed())
                }
            }
        }
        Command::Generate { kind, output } => {
            let g = match kind {
                GenerateKind::CompleteP2p(s) => fixtures::complete_p2p(s.n)?,
                GenerateKind::CycleLocalBroadcast(s) => fixtures::cycle_local_broadcast(s.n)?,
                GenerateKind::PathLocalBroadcast(s) => fixtures::path_local_broadcast(s.n)?,
                GenerateKind::Figure1a => fixtures::figure1a(),
                GenerateKind::Figure1b => fixtures::figure1b(),
                GenerateKind::Counterexample { f } => counterexample_hypergraph(*f)?,
                GenerateKind::Union { first, second } => fixtures::union(&read_topology(first)?, &read_topology(second)?)?,
                GenerateKind::Random { n, edges, seed } => fixtures::random(*n, *edges, *seed)?,
            };
            let text = if cli.json { serde_json::to_string_pretty(&g)? + "\n" } else { format::serialize(&g) };
            match output {
                Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Crossval { class, n_max, f } => {
            if *n_max > 6 {
                bail!("--n-max {n_max} is beyond exhaustive enumeration (at most 6)");
            }
            let summary = crossval_class((*class).into(), *n_max, *f)?;
            if cli.json {
                emit_json(&summary)?;
            } else {
                for row in &summary.rows {
                    println!(
                        "n = {}: {} instances, {} satisfy the condition, {} disagreements ({})",
                        row.n, row.instances, row.general_holds, row.disagreements, row.scope
                    );
                }
                println!("disagreements: {}", summary.disagreements);
                for ex in &summary.examples {
                    println!("---\n{ex}");
                }
            }
            Ok(summary.disagreements == 0)
        }
    }
}

fn print_run(report: &hyperconsensus::protocol::RunReport) {
    println!("rounds: {}", report.rounds);
    for p in &report.phases {
        let gamma: String = p.gamma.iter().map(|(v, b)| format!(" {v}:{b}")).collect();
        match (&p.source, &p.diagnostic) {
            (_, Some(d)) => println!("phase F = {}: aborted: {d}", p.fault_set),
            (Some(s), None) => println!("phase F = {} S = {s}: gamma{gamma}", p.fault_set),
            (None, None) => println!("phase F = {}: gamma{gamma}", p.fault_set),
        }
    }
    let outputs: String = report.outputs.iter().map(|(v, b)| format!(" {v}:{b}")).collect();
    println!("outputs:{outputs}");
    let v = report.verdict;
    println!("termination: {}\nagreement: {}\nvalidity: {}", v.termination, v.agreement, v.validity);
    for l in &report.lemma_violations {
        println!("lemma violation: {l}");
    }
}
