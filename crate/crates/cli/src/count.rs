//! `count`: the counting circuit, its window prediction and the sampled estimate.

use entsearch_core::counting::{
    ancilla_distribution, build_count_state_within, estimate_from_outcome,
    predicted_ancilla_distribution, run_count_within,
};
use entsearch_core::qstate::moments;
use entsearch_core::{AmplitudeBudget, CountReport, EntangledState, GoodSet};
use serde::Serialize;

use crate::report::Check;
use crate::scenario::Tolerances;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AncillaRow {
    pub m: usize,
    pub circuit: f64,
    pub predicted: Option<f64>,
    pub t_tilde: f64,
    pub in_window: bool,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    #[serde(flatten)]
    pub estimate: CountReport,
    /// Exact circuit mass on the predicted window.
    pub w_circuit: Option<f64>,
    pub distribution: Vec<AncillaRow>,
    pub max_distribution_deviation: Option<f64>,
}

pub fn check_register(p: usize) -> Result<(), CliError> {
    if p == 0 || !p.is_power_of_two() {
        return Err(CliError::Config(format!(
            "p must be a power of two, got {p}"
        )));
    }
    Ok(())
}

pub fn run(
    state: &EntangledState,
    good: &GoodSet,
    p: usize,
    repetitions: usize,
    seed: u64,
    tol: &Tolerances,
    budget: AmplitudeBudget,
) -> Result<(CountResult, Vec<Check>), CliError> {
    check_register(p)?;
    if repetitions == 0 {
        return Err(CliError::Config("repetitions must be at least 1".into()));
    }
    let report = run_count_within(state, good, p, repetitions, seed, budget)?;
    let dist = ancilla_distribution(&build_count_state_within(state, good, p, budget)?);
    let (n, t) = (state.len(), good.t());
    let predicted = if t > 0 && t < n {
        Some(predicted_ancilla_distribution(&moments(state, good)?, p)?)
    } else {
        None
    };

    let distribution: Vec<AncillaRow> = dist
        .iter()
        .enumerate()
        .map(|(m, &circuit)| AncillaRow {
            m,
            circuit,
            predicted: predicted.as_ref().map(|d| d[m]),
            t_tilde: estimate_from_outcome(m, p, n).t_tilde,
            in_window: report.window.contains(&m),
            samples: report
                .outcomes
                .iter()
                .find(|o| o.m == m)
                .map_or(0, |o| o.count),
        })
        .collect();
    let w_circuit = report
        .w_predicted
        .map(|_| report.window.iter().map(|&m| dist[m]).sum::<f64>());
    let max_dev = predicted.as_ref().map(|pr| {
        pr.iter()
            .zip(&dist)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });

    let mut checks = vec![Check::at_most(
        "|sum of ancilla distribution - 1|",
        (dist.iter().sum::<f64>() - 1.0).abs(),
        tol.probability,
    )];
    if let Some(d) = max_dev {
        checks.push(Check::at_most(
            "max |predicted - circuit| per outcome",
            d,
            tol.probability,
        ));
    }
    if let (Some(wp), Some(wc)) = (report.w_predicted, w_circuit) {
        checks.push(Check::at_most(
            "|W_predicted - W_circuit|",
            (wp - wc).abs(),
            tol.probability,
        ));
    }
    checks.push(Check::at_most(
        "|majority t - t_true| against the error bound",
        (report.majority_t - t as f64).abs(),
        report.bound,
    ));

    Ok((
        CountResult {
            estimate: report,
            w_circuit,
            distribution,
            max_distribution_deviation: max_dev,
        },
        checks,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sixteen() {
        let s = EntangledState::new_flat(4, 1).unwrap();
        let g = GoodSet::new(16, vec![0, 5, 9, 12]).unwrap();
        let (r, checks) = run(
            &s,
            &g,
            16,
            101,
            7,
            &Tolerances::default(),
            AmplitudeBudget::default(),
        )
        .unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert!((r.estimate.bound - 3.758).abs() < 1e-3);
        assert!(r.w_circuit.unwrap() > 0.5);
        assert_eq!(r.estimate.window, vec![2, 3, 13, 14]);
    }

    #[test]
    fn no_good_items_estimates_zero() {
        let s = EntangledState::new_flat(3, 1).unwrap();
        let (r, checks) = run(
            &s,
            &GoodSet::empty(8),
            8,
            11,
            1,
            &Tolerances::default(),
            AmplitudeBudget::default(),
        )
        .unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        assert_eq!(r.estimate.majority_t, 0.0);
    }

    #[test]
    fn rejects_odd_register() {
        let s = EntangledState::new_flat(2, 1).unwrap();
        let g = GoodSet::new(4, vec![0]).unwrap();
        let err = run(
            &s,
            &g,
            3,
            1,
            0,
            &Tolerances::default(),
            AmplitudeBudget::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("power of two"));
    }
}
