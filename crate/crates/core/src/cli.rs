//! The `mca` command line: argument parsing, commands and reports.
//!
//! Exit codes: 0 when the scenario converges (or is valid), 2 when a
//! counterexample is found, 1 on any error.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::explorer::{enumerate_with, representative_run, simulate, ExploreConfig, Outcome, Trace, Verdict};
use crate::netmodel::{validate_mapping, ItemId, Mapping, MappingCheck};
use crate::oracle::{approximation_ratio, optimal_allocation, within_guard, Allocation};
use crate::protocol::{agreed_winners, NetState};
use crate::scenario::{load_scenario, Scenario};

/// Environment variable overriding the explorer's state ceiling.
pub const STATE_CEILING_VAR: &str = "MCA_STATE_CEILING";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_COUNTEREXAMPLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mca", version, about = "Max-consensus auction checker")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore every message interleaving and report convergence.
    Check(Flags),
    /// Run one seeded random interleaving.
    Simulate(Flags),
    /// Compute the optimal allocation by exhaustive search.
    Oracle(Flags),
    /// Load and validate a scenario file.
    Validate(Flags),
}

#[derive(Debug, Args)]
pub struct Flags {
    pub scenario: PathBuf,
    #[arg(long)]
    pub bound: Option<u64>,
    #[arg(long)]
    pub slack: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Write the execution trace here as JSONL.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_ms: f64,
}

/// Rational as numerator and denominator plus a display value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    pub numer: u64,
    pub denom: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<Mapping>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unassigned: Option<Vec<ItemId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping_valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping_check: Option<MappingCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<RatioReport>,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub max_steps: u64,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub steps: usize,
    pub timings: Timings,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub allocation: Allocation,
    pub timings: Timings,
}

fn ms(start: Instant) -> Timings {
    Timings { total_ms: start.elapsed().as_secs_f64() * 1e3 }
}

fn config(scenario: &Scenario, flags: &Flags) -> Result<ExploreConfig, String> {
    let mut cfg = ExploreConfig::for_scenario(scenario).map_err(|e| e.to_string())?;
    if let Some(b) = flags.bound {
        cfg.bound = b;
    }
    if let Some(s) = flags.slack {
        cfg.slack = s;
    }
    if let Ok(v) = std::env::var(STATE_CEILING_VAR) {
        cfg.state_ceiling = v
            .trim()
            .parse()
            .map_err(|_| format!("{STATE_CEILING_VAR}: expected a non-negative integer, got {v:?}"))?;
    }
    Ok(cfg)
}

fn write_trace(trace: &Trace, path: &Path) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    trace.write_jsonl(BufWriter::new(file)).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn emit<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

/// Mapping encoded by an agreed state, the items nobody won, and the
/// mapping's check against the virtual network restricted to the won items.
pub fn extract_mapping(state: &NetState, scenario: &Scenario) -> (Mapping, Vec<ItemId>, MappingCheck) {
    let assignments = agreed_winners(state);
    let won: BTreeSet<ItemId> = assignments.keys().copied().collect();
    let unassigned = scenario.items().into_iter().filter(|i| !won.contains(i)).collect();
    let mapping = Mapping { assignments };
    let check = validate_mapping(&mapping, &scenario.virtual_net.restrict_to(&won), &scenario.physical);
    (mapping, unassigned, check)
}

/// Exhaustive check. On convergence the report carries the mapping of a
/// representative run and, within the oracle guard, its approximation ratio.
pub fn cmd_check(scenario: &Scenario, flags: &Flags) -> Result<(i32, Report), String> {
    let start = Instant::now();
    let cfg = config(scenario, flags)?;
    let verdict = enumerate_with(scenario, &cfg).map_err(|e| e.to_string())?;
    let mut report = Report {
        verdict,
        mapping: None,
        unassigned: None,
        mapping_valid: None,
        mapping_check: None,
        ratio: None,
        timings: Timings { total_ms: 0.0 },
    };
    let code = if report.verdict.converged() {
        let (trace, state) = representative_run(scenario, cfg.budget()).map_err(|e| e.to_string())?;
        if let Some(path) = &flags.trace {
            write_trace(&trace, path)?;
        }
        let (mapping, unassigned, check) = extract_mapping(&state, scenario);
        report.mapping = Some(mapping);
        report.unassigned = Some(unassigned);
        report.mapping_valid = Some(check.valid);
        report.mapping_check = Some(check);
        if within_guard(scenario) {
            let r = approximation_ratio(&state, scenario).map_err(|e| e.to_string())?;
            report.ratio = Some(RatioReport { numer: *r.numer(), denom: *r.denom() });
        }
        EXIT_OK
    } else {
        if let (Some(path), Some(w)) = (&flags.trace, &report.verdict.witness) {
            write_trace(w, path)?;
        }
        EXIT_COUNTEREXAMPLE
    };
    report.timings = ms(start);
    Ok((code, report))
}

pub fn cmd_simulate(scenario: &Scenario, flags: &Flags) -> Result<(i32, SimulationReport), String> {
    let start = Instant::now();
    let max_steps = match flags.max_steps {
        Some(m) => m,
        None => config(scenario, flags)?.budget(),
    };
    let sim = simulate(scenario, flags.seed, max_steps).map_err(|e| e.to_string())?;
    if let Some(path) = &flags.trace {
        write_trace(&sim.trace, path)?;
    }
    let code = match sim.outcome {
        Outcome::Converged { .. } => EXIT_OK,
        _ => EXIT_COUNTEREXAMPLE,
    };
    Ok((
        code,
        SimulationReport {
            seed: flags.seed,
            max_steps,
            outcome: sim.outcome,
            steps: sim.trace.len(),
            timings: ms(start),
        },
    ))
}

pub fn cmd_oracle(scenario: &Scenario) -> Result<OracleReport, String> {
    let start = Instant::now();
    let allocation = optimal_allocation(scenario).map_err(|e| e.to_string())?;
    Ok(OracleReport { allocation, timings: ms(start) })
}

fn summary(report: &Report) -> String {
    let v = &report.verdict;
    let mut out = format!(
        "{}: {} paths, {} states, max depth {} (budget {} + {})",
        if v.converged() { "all-converge" } else { "counterexample" },
        v.paths_explored,
        v.states_explored,
        v.max_depth_seen,
        v.bound,
        v.slack,
    );
    if let Some(w) = &v.witness {
        let cause = serde_json::to_value(w.cause).expect("cause serializes");
        out += &format!("\ncause: {} after {} messages", cause.as_str().unwrap_or("?"), w.len());
        if let Some(s) = w.cycle_start {
            out += &format!(" (repeats state {s})");
        }
    }
    if let Some(m) = &report.mapping {
        for (item, agent) in &m.assignments {
            out += &format!("\n  item {item} -> agent {agent}");
        }
    }
    if let Some(valid) = report.mapping_valid {
        out += &format!("\nmapping valid: {valid}");
    }
    if let Some(r) = &report.ratio {
        out += &format!("\napproximation ratio: {}/{}", r.numer, r.denom);
    }
    out
}

/// Runs one command and returns its exit code.
pub fn run(cli: Cli) -> i32 {
    let (Command::Check(flags)
    | Command::Simulate(flags)
    | Command::Oracle(flags)
    | Command::Validate(flags)) = &cli.command;
    let scenario = match load_scenario(&flags.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let result = match &cli.command {
        Command::Validate(_) => {
            if flags.json {
                emit(&serde_json::json!({ "valid": true }));
            } else {
                println!("valid: {} agents, {} items", scenario.agents().len(), scenario.items().len());
            }
            Ok(EXIT_OK)
        }
        Command::Check(_) => cmd_check(&scenario, flags).map(|(code, report)| {
            if flags.json {
                emit(&report);
            } else {
                println!("{}", summary(&report));
            }
            code
        }),
        Command::Simulate(_) => cmd_simulate(&scenario, flags).map(|(code, report)| {
            if flags.json {
                emit(&report);
            } else {
                let outcome = match report.outcome {
                    Outcome::Converged { .. } => "converged".to_string(),
                    Outcome::Cycle { start } => format!("cycle (repeats state {start})"),
                    Outcome::BoundExceeded => "bound exceeded".to_string(),
                    Outcome::NoConsensus => "no consensus".to_string(),
                };
                println!("seed {}: {outcome} after {} messages", report.seed, report.steps);
            }
            code
        }),
        Command::Oracle(_) => cmd_oracle(&scenario).map(|report| {
            if flags.json {
                emit(&report);
            } else {
                println!("optimal value: {}", report.allocation.value);
                for (agent, items) in &report.allocation.bundles {
                    let items: Vec<String> = items.iter().map(|i| i.to_string()).collect();
                    println!("  agent {agent}: [{}]", items.join(", "));
                }
            }
            EXIT_OK
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}
