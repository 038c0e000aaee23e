//! `sweep`: one row of predictions and deviations per grid cell.

use std::time::Instant;

use entsearch_core::analytic::{
    best_integer_time, closed_form_rows, optimal_time, oscillation_params, p_max,
};
use entsearch_core::counting::{
    ancilla_distribution, build_count_state_within, window_probability,
};
use entsearch_core::grover::{grover_iterate, grover_step_in_place};
use entsearch_core::qstate::moments;
use entsearch_core::{AmplitudeBudget, EntangledState, Error, GoodSet};
use rayon::prelude::*;
use serde::Serialize;

use crate::count::check_register;
use crate::find::default_iterations;
use crate::report::Check;
use crate::scenario::{Scenario, SweepState, Tolerances};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CellKey {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub t: usize,
    #[serde(rename = "P")]
    pub p: Option<usize>,
    pub seed: u64,
}

/// One grid cell. Fields after `status` are empty for skipped cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(flatten)]
    pub key: CellKey,
    pub status: String,
    pub theta: Option<f64>,
    pub p_av: Option<f64>,
    pub delta_p: Option<f64>,
    pub phi_r: Option<f64>,
    pub phi_i: Option<f64>,
    pub degenerate: Option<bool>,
    pub n0: Option<f64>,
    pub best_n: Option<u64>,
    pub p_max: Option<f64>,
    pub p_best_simulated: Option<f64>,
    pub max_row_deviation: Option<f64>,
    pub max_probability_deviation: Option<f64>,
    pub max_variance_delta: Option<f64>,
    pub case: Option<String>,
    pub w_predicted: Option<f64>,
    pub w_circuit: Option<f64>,
    pub w_deviation: Option<f64>,
    pub bound: Option<f64>,
    pub window_within_bound: Option<bool>,
    pub runtime_ms: Option<f64>,
}

impl SweepRow {
    fn blank(key: CellKey, status: String) -> Self {
        SweepRow {
            key,
            status,
            theta: None,
            p_av: None,
            delta_p: None,
            phi_r: None,
            phi_i: None,
            degenerate: None,
            n0: None,
            best_n: None,
            p_max: None,
            p_best_simulated: None,
            max_row_deviation: None,
            max_probability_deviation: None,
            max_variance_delta: None,
            case: None,
            w_predicted: None,
            w_circuit: None,
            w_deviation: None,
            bound: None,
            window_within_bound: None,
            runtime_ms: None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.status != "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// The CSV header, in column order.
pub const CSV_HEADER: &[&str] = &[
    "N",
    "D",
    "t",
    "P",
    "seed",
    "status",
    "theta",
    "p_av",
    "delta_p",
    "phi_r",
    "phi_i",
    "degenerate",
    "n0",
    "best_n",
    "p_max",
    "p_best_simulated",
    "max_row_deviation",
    "max_probability_deviation",
    "max_variance_delta",
    "case",
    "w_predicted",
    "w_circuit",
    "w_deviation",
    "bound",
    "window_within_bound",
    "runtime_ms",
];

/// Expands the grid into sorted cell keys, validating sizes up front.
pub fn cells(s: &Scenario) -> Result<Vec<CellKey>, CliError> {
    let grid = s
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a `grid`".into()))?;
    for &n in &grid.n {
        if n < 2 || !n.is_power_of_two() {
            return Err(CliError::Config(format!(
                "grid.n: {n} is not a power of two >= 2"
            )));
        }
    }
    let dims = grid
        .data_dim
        .clone()
        .unwrap_or_else(|| vec![s.data_dim.unwrap_or(1)]);
    if dims.contains(&0) {
        return Err(CliError::Config(
            "grid.data_dim: entries must be >= 1".into(),
        ));
    }
    let ps: Vec<Option<usize>> = match &grid.p {
        Some(ps) => ps.iter().map(|&p| Some(p)).collect(),
        None => vec![s.p],
    };
    for p in ps.iter().flatten() {
        check_register(*p)?;
    }
    let seeds = grid.seeds.clone().unwrap_or_else(|| vec![s.seed]);
    let mut out = Vec::new();
    for &n in &grid.n {
        for &d in &dims {
            for &t in &grid.t {
                for &p in &ps {
                    for &seed in &seeds {
                        out.push(CellKey { n, d, t, p, seed });
                    }
                }
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn run_cell(
    key: CellKey,
    kind: SweepState,
    iterations: Option<u64>,
    budget: AmplitudeBudget,
    timings: bool,
) -> Result<SweepRow, Error> {
    let start = Instant::now();
    let n_qubits = key.n.trailing_zeros();
    if key.t == 0 || key.t >= key.n {
        return Ok(SweepRow::blank(
            key,
            format!("skipped: t = {} outside 1..N-1", key.t),
        ));
    }
    let needed = key
        .n
        .saturating_mul(key.d)
        .saturating_mul(key.p.unwrap_or(1).max(2));
    if let Err(e) = budget.check(needed) {
        return Ok(SweepRow::blank(key, format!("skipped: {e}")));
    }
    let good = GoodSet::random(key.n, key.t, key.seed)?;
    let state = match kind {
        SweepState::Flat => EntangledState::new_flat(n_qubits, key.d)?,
        SweepState::Random => EntangledState::random(n_qubits, key.d, &good, key.seed)?,
    };
    let m0 = moments(&state, &good)?;
    let params = oscillation_params(&m0)?;
    let (n0, best_n) = if params.degenerate {
        (None, None)
    } else {
        (
            Some(optimal_time(&params, 0)?),
            Some(best_integer_time(&params)?),
        )
    };

    let last = iterations.unwrap_or_else(|| default_iterations(m0.theta));
    let (mut row_dev, mut prob_dev, mut var_dev) = (0.0f64, 0.0f64, 0.0f64);
    let mut cur = state.clone();
    for k in 0..=last {
        if k > 0 {
            grover_step_in_place(&mut cur, &good);
        }
        row_dev = row_dev.max(closed_form_rows(&state, &good, k)?.max_abs_diff(&cur));
        prob_dev = prob_dev.max((params.probability_at(k as f64) - cur.good_mass(&good)).abs());
        let mk = moments(&cur, &good)?;
        var_dev = var_dev
            .max((mk.var_g() - m0.var_g()).abs())
            .max((mk.var_b() - m0.var_b()).abs());
    }
    let p_best_simulated = best_n.map(|b| grover_iterate(&state, &good, b).good_mass(&good));

    let mut row = SweepRow::blank(key, "ok".into());
    if let Some(p) = key.p.filter(|&p| p >= 2) {
        let pred = window_probability(&m0, p)?;
        let dist = ancilla_distribution(&build_count_state_within(&state, &good, p, budget)?);
        let wc: f64 = pred.outcomes.iter().map(|&m| dist[m]).sum();
        let bound = entsearch_core::counting::error_bound(key.t as f64, p, key.n);
        let within = pred.outcomes.iter().all(|&m| {
            (entsearch_core::counting::estimate_from_outcome(m, p, key.n).t_tilde - key.t as f64)
                .abs()
                <= bound
        });
        row.case = Some(pred.case.as_str().to_string());
        row.w_predicted = Some(pred.w);
        row.w_circuit = Some(wc);
        row.w_deviation = Some((pred.w - wc).abs());
        row.bound = Some(bound);
        row.window_within_bound = Some(within);
    }
    row.theta = Some(m0.theta);
    row.p_av = Some(params.p_av);
    row.delta_p = Some(params.delta_p);
    row.phi_r = Some(params.phi_r);
    row.phi_i = Some(params.phi_i);
    row.degenerate = Some(params.degenerate);
    row.n0 = n0;
    row.best_n = best_n;
    row.p_max = Some(p_max(&params));
    row.p_best_simulated = p_best_simulated;
    row.max_row_deviation = Some(row_dev);
    row.max_probability_deviation = Some(prob_dev);
    row.max_variance_delta = Some(var_dev);
    row.runtime_ms = timings.then(|| start.elapsed().as_secs_f64() * 1e3);
    Ok(row)
}

/// Runs every cell on a pool of `workers` threads. Rows come back sorted by
/// `(N, D, t, P, seed)` whatever the schedule.
pub fn run(
    s: &Scenario,
    workers: usize,
    budget: AmplitudeBudget,
    timings: bool,
) -> Result<(SweepResult, Vec<Check>, Vec<String>), CliError> {
    let keys = cells(s)?;
    let kind = s.grid.as_ref().map(|g| g.state).unwrap_or_default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        keys.par_iter()
            .map(|&k| run_cell(k, kind, s.iterations, budget, timings))
            .collect::<Result<_, Error>>()
    })?;
    let warnings = rows
        .iter()
        .filter(|r| r.is_skipped())
        .map(|r| {
            format!(
                "cell N={} D={} t={} P={} seed={}: {}",
                r.key.n,
                r.key.d,
                r.key.t,
                r.key.p.map_or("-".into(), |p| p.to_string()),
                r.key.seed,
                r.status
            )
        })
        .collect();
    let checks = sweep_checks(&rows, &s.tolerances);
    Ok((SweepResult { rows }, checks, warnings))
}

fn sweep_checks(rows: &[SweepRow], tol: &Tolerances) -> Vec<Check> {
    let max_of = |f: fn(&SweepRow) -> Option<f64>| rows.iter().filter_map(f).fold(0.0, f64::max);
    let mut checks = vec![
        Check::at_most(
            "max closed-form row deviation",
            max_of(|r| r.max_row_deviation),
            tol.amplitude,
        ),
        Check::at_most(
            "max |P_analytic(n) - P_simulated(n)|",
            max_of(|r| r.max_probability_deviation),
            tol.probability,
        ),
        Check::at_most(
            "max variance drift",
            max_of(|r| r.max_variance_delta),
            tol.amplitude,
        ),
    ];
    if rows.iter().any(|r| r.w_deviation.is_some()) {
        checks.push(Check::at_most(
            "max |W_predicted - W_circuit|",
            max_of(|r| r.w_deviation),
            tol.probability,
        ));
        let outside = rows
            .iter()
            .filter(|r| r.window_within_bound == Some(false))
            .count();
        checks.push(Check::at_most(
            "cells with a window outcome outside the bound",
            outside as f64,
            0.0,
        ));
    }
    checks
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Shortest round-trip form, with an exponent for very small or large values.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn fcell(v: &Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Renders rows as CSV; an empty sweep gives the header alone.
pub fn to_csv(rows: &[SweepRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.key.n.to_string(),
            r.key.d.to_string(),
            r.key.t.to_string(),
            cell(&r.key.p),
            r.key.seed.to_string(),
            r.status.clone(),
            fcell(&r.theta),
            fcell(&r.p_av),
            fcell(&r.delta_p),
            fcell(&r.phi_r),
            fcell(&r.phi_i),
            cell(&r.degenerate),
            fcell(&r.n0),
            cell(&r.best_n),
            fcell(&r.p_max),
            fcell(&r.p_best_simulated),
            fcell(&r.max_row_deviation),
            fcell(&r.max_probability_deviation),
            fcell(&r.max_variance_delta),
            cell(&r.case),
            fcell(&r.w_predicted),
            fcell(&r.w_circuit),
            fcell(&r.w_deviation),
            fcell(&r.bound),
            cell(&r.window_within_bound),
            fcell(&r.runtime_ms),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
