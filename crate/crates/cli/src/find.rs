//! `find`: the success-probability law against direct simulation.

use std::f64::consts::PI;

use entsearch_core::analytic::{
    best_integer_time, closed_form_rows, optimal_time, oscillation_params, p_max,
};
use entsearch_core::grover::grover_step_in_place;
use entsearch_core::qstate::moments;
use entsearch_core::{EntangledState, GoodSet, OscillationParams};
use serde::Serialize;

use crate::report::Check;
use crate::scenario::Tolerances;
use crate::CliError;

/// Table length when the angle gives no natural period (`t = 0` or `t = N`).
pub const DEFAULT_ITERATIONS: u64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityRow {
    pub n: u64,
    pub analytic: f64,
    pub simulated: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FindResult {
    pub n: usize,
    pub t: usize,
    pub data_dim: usize,
    pub theta: f64,
    pub g_norm2: f64,
    pub b_norm2: f64,
    pub var_g: f64,
    pub var_b: f64,
    pub normalization: f64,
    /// Absent when `t = 0` or `t = N`, where `P(n) = t/N` trivially.
    pub params: Option<OscillationParams>,
    pub degenerate: bool,
    pub n0: Option<f64>,
    pub best_n: Option<u64>,
    pub p_max: f64,
    pub p_best_simulated: Option<f64>,
    pub table: Vec<ProbabilityRow>,
    pub max_probability_deviation: f64,
    /// Closed-form rows against the simulated rows; absent for `t ∈ {0, N}`.
    pub max_row_deviation: Option<f64>,
    pub max_variance_delta_g: f64,
    pub max_variance_delta_b: f64,
    pub max_norm_drift: f64,
}

/// Default table end: `⌈2π/θ⌉`, two periods of the probability law.
pub fn default_iterations(theta: f64) -> u64 {
    if theta > 0.0 && theta < PI / 2.0 {
        (2.0 * PI / theta).ceil() as u64
    } else {
        DEFAULT_ITERATIONS
    }
}

pub fn run(
    state: &EntangledState,
    good: &GoodSet,
    iterations: Option<u64>,
    tol: &Tolerances,
) -> Result<(FindResult, Vec<Check>), CliError> {
    let m0 = moments(state, good)?;
    let (n, t) = (state.len(), good.t());
    let trivial = t == 0 || t == n;
    let params = if trivial {
        None
    } else {
        Some(oscillation_params(&m0)?)
    };
    let degenerate = params.is_none_or(|p| p.degenerate);
    let analytic = |k: u64| match &params {
        Some(p) => p.probability_at(k as f64),
        None => t as f64 / n as f64,
    };
    let (n0, best_n) = match &params {
        Some(p) if !p.degenerate => (Some(optimal_time(p, 0)?), Some(best_integer_time(p)?)),
        _ => (None, None),
    };
    let last = iterations.unwrap_or_else(|| default_iterations(m0.theta));

    let mut table = Vec::with_capacity(last as usize + 1);
    let mut max_row = if trivial { None } else { Some(0.0f64) };
    let (mut dvg, mut dvb, mut drift) = (0.0f64, 0.0f64, 0.0f64);
    let mut p_best_simulated = None;
    let mut cur = state.clone();
    for k in 0..=last {
        if k > 0 {
            grover_step_in_place(&mut cur, good);
        }
        let simulated = cur.good_mass(good);
        let a = analytic(k);
        table.push(ProbabilityRow {
            n: k,
            analytic: a,
            simulated,
            deviation: (a - simulated).abs(),
        });
        if Some(k) == best_n {
            p_best_simulated = Some(simulated);
        }
        if let Some(r) = max_row.as_mut() {
            *r = r.max(closed_form_rows(state, good, k)?.max_abs_diff(&cur));
        }
        let mk = moments(&cur, good)?;
        dvg = dvg.max((mk.var_g() - m0.var_g()).abs());
        dvb = dvb.max((mk.var_b() - m0.var_b()).abs());
        drift = drift.max((cur.physical_norm2() - 1.0).abs());
    }
    if let (None, Some(b)) = (p_best_simulated, best_n) {
        p_best_simulated =
            Some(entsearch_core::grover::grover_iterate(state, good, b).good_mass(good));
    }
    let max_dev = table.iter().map(|r| r.deviation).fold(0.0, f64::max);

    let mut checks = vec![Check::at_most(
        "max |P_analytic(n) - P_simulated(n)|",
        max_dev,
        tol.probability,
    )];
    if let Some(r) = max_row {
        checks.push(Check::at_most(
            "max closed-form row deviation",
            r,
            tol.amplitude,
        ));
    }
    checks.push(Check::at_most(
        "max |var_g(n) - var_g(0)|",
        dvg,
        tol.amplitude,
    ));
    checks.push(Check::at_most(
        "max |var_b(n) - var_b(0)|",
        dvb,
        tol.amplitude,
    ));
    checks.push(Check::at_most("max norm drift", drift, tol.unitarity));
    checks.push(Check::at_most(
        "normalization identity error",
        (m0.normalization() - 1.0).abs(),
        tol.probability,
    ));

    let result = FindResult {
        n,
        t,
        data_dim: state.data_dim(),
        theta: m0.theta,
        g_norm2: m0.g_norm2(),
        b_norm2: m0.b_norm2(),
        var_g: m0.var_g(),
        var_b: m0.var_b(),
        normalization: m0.normalization(),
        params,
        degenerate,
        n0,
        best_n,
        p_max: params.map_or(t as f64 / n as f64, |p| p_max(&p)),
        p_best_simulated,
        table,
        max_probability_deviation: max_dev,
        max_row_deviation: max_row,
        max_variance_delta_g: dvg,
        max_variance_delta_b: dvb,
        max_norm_drift: drift,
    };
    Ok((result, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_four_finds_in_one_step() {
        let s = EntangledState::new_flat(2, 1).unwrap();
        let g = GoodSet::new(4, vec![0]).unwrap();
        let (r, checks) = run(&s, &g, None, &Tolerances::default()).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert!((r.table[1].simulated - 1.0).abs() < 1e-12);
        assert_eq!(r.best_n, Some(1));
        assert_eq!(r.table.len(), 13);
        assert!(!r.degenerate);
    }

    #[test]
    fn one_to_one_is_degenerate() {
        let s = EntangledState::one_to_one(3).unwrap();
        let g = GoodSet::new(8, vec![1, 5]).unwrap();
        let (r, checks) = run(&s, &g, Some(10), &Tolerances::default()).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert!(r.degenerate);
        assert_eq!(r.best_n, None);
        for row in &r.table {
            assert!((row.simulated - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_good_set_is_constant_zero() {
        let s = EntangledState::new_flat(3, 1).unwrap();
        let (r, checks) = run(&s, &GoodSet::empty(8), None, &Tolerances::default()).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert_eq!(r.table.len() as u64, DEFAULT_ITERATIONS + 1);
        assert!(r.params.is_none());
    }
}
