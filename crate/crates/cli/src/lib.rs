//! Scenario runner for entsearch: reads a JSON scenario, runs it against the
//! core library and renders a JSON or CSV report.
//!
//! Exit codes used by the `entsearch` binary: `0` success, `1` usage or
//! configuration error (nothing is written), `2` a check failed.

pub mod count;
pub mod find;
pub mod report;
pub mod scenario;
pub mod sweep;
pub mod verify;

use std::path::Path;
use std::time::Instant;

use entsearch_core::AmplitudeBudget;
use sweep::num;

pub use report::{Check, Report, ReportBody};
pub use scenario::{Kind, OutputFormat, Scenario, Tolerances};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] entsearch_core::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

/// Options that come from the command line rather than the scenario file.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub seed: Option<u64>,
    pub timings: bool,
    pub budget: AmplitudeBudget,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 1,
            seed: None,
            timings: false,
            budget: AmplitudeBudget::default(),
        }
    }
}

/// Runs a scenario. `base` resolves relative state-file paths.
pub fn run_scenario(
    mut scenario: Scenario,
    opts: &RunOptions,
    base: &Path,
) -> Result<Report, CliError> {
    let start = Instant::now();
    if let Some(seed) = opts.seed {
        scenario.seed = seed;
    }
    let tol = scenario.tolerances;
    let mut warnings = Vec::new();
    let (body, checks) = match scenario.kind {
        Kind::Find => {
            let (state, good) = scenario.build_problem(base, opts.budget)?;
            let (r, c) = find::run(&state, &good, scenario.iterations, &tol)?;
            (ReportBody::Find(Box::new(r)), c)
        }
        Kind::Count => {
            let p = scenario
                .p
                .ok_or_else(|| CliError::Config("`p` is required for count".into()))?;
            count::check_register(p)?;
            let (state, good) = scenario.build_problem(base, opts.budget)?;
            let (r, c) = count::run(
                &state,
                &good,
                p,
                scenario.repetitions,
                scenario.seed,
                &tol,
                opts.budget,
            )?;
            (ReportBody::Count(Box::new(r)), c)
        }
        Kind::Verify => {
            let ctx = verify::VerifyContext {
                settings: scenario.verify.clone(),
                tolerances: tol,
                seed: scenario.seed,
                workers: opts.workers,
            };
            let criteria = verify::run_criteria(&ctx)?;
            let checks = criteria
                .iter()
                .flat_map(|c| {
                    c.checks.iter().map(move |k| Check {
                        name: format!("[{}] {}", c.id, k.name),
                        ..k.clone()
                    })
                })
                .collect();
            (
                ReportBody::Verify(verify::VerifyResult { criteria }),
                checks,
            )
        }
        Kind::Sweep => {
            let (r, c, w) = sweep::run(&scenario, opts.workers, opts.budget, opts.timings)?;
            warnings = w;
            (ReportBody::Sweep(r), c)
        }
    };
    let mut report = Report::new(scenario, body, checks);
    report.warnings = warnings;
    report.wall_clock_s = opts.timings.then(|| start.elapsed().as_secs_f64());
    Ok(report)
}

/// Renders a report in the scenario's output format.
pub fn render(report: &Report) -> Result<String, CliError> {
    match report.scenario.output {
        OutputFormat::Json => Ok(report.to_json()),
        OutputFormat::Csv => render_csv(report),
    }
}

fn render_csv(report: &Report) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    match &report.result {
        ReportBody::Sweep(r) => return sweep::to_csv(&r.rows),
        ReportBody::Find(r) => {
            w.write_record(["n", "analytic", "simulated", "deviation"])?;
            for row in &r.table {
                w.write_record([
                    row.n.to_string(),
                    num(row.analytic),
                    num(row.simulated),
                    num(row.deviation),
                ])?;
            }
        }
        ReportBody::Count(r) => {
            w.write_record([
                "m",
                "circuit",
                "predicted",
                "t_tilde",
                "in_window",
                "samples",
            ])?;
            for row in &r.distribution {
                w.write_record([
                    row.m.to_string(),
                    num(row.circuit),
                    row.predicted.map(num).unwrap_or_default(),
                    num(row.t_tilde),
                    row.in_window.to_string(),
                    row.samples.to_string(),
                ])?;
            }
        }
        ReportBody::Verify(r) => {
            w.write_record([
                "id",
                "criterion",
                "check",
                "value",
                "tolerance",
                "relation",
                "passed",
            ])?;
            for c in &r.criteria {
                for k in &c.checks {
                    w.write_record([
                        c.id.to_string(),
                        c.name.clone(),
                        k.name.clone(),
                        num(k.value),
                        num(k.tolerance),
                        serde_json::to_value(k.relation)
                            .ok()
                            .and_then(|v| v.as_str().map(str::to_string))
                            .unwrap_or_default(),
                        k.passed.to_string(),
                    ])?;
                }
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// The exit code for a finished report.
pub fn exit_code(report: &Report) -> i32 {
    if report.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}
