//! Counting marked items: controlled Grover powers on an entangled state,
//! a QFT on the ancilla register, and estimation of `t` from the outcome.
//!
//! The circuit prepares `(1/√P) Σ_m |m⟩ G_H^m |ψ⟩` and applies the QFT to
//! the ancilla, giving
//! `|ψ_f⟩ = (1/P) Σ_{m,c} e^{2πi mc/P} |c⟩ G_H^m |ψ⟩`.
//! Its ancilla distribution peaks near `c = f` and `c = P − f` with
//! `f = Pθ/π`; the good-sector spread sits on `c = 0` and the bad-sector
//! spread on `c = P/2`.

mod qft;
mod window;

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use qft::{inverse_qft, inverse_qft_in_place, qft, qft_in_place};
pub use window::{
    error_bound, estimate_from_outcome, kernel_s, peak_window, predicted_ancilla_distribution,
    sigma_sum, window_probability, CountEstimate, PeakWindow, Sign, WindowCase, WindowPrediction,
    INTEGER_PEAK_TOL,
};

use crate::grover::grover_step_in_place;
use crate::qstate::moments;
use crate::{AmplitudeBudget, EntangledState, Error, GoodSet, Result, C64};

/// Joint ancilla × search × data amplitudes after the counting circuit.
///
/// Entry `(m, a, d)` sits at `(m * N + a) * D + d` and carries the physical
/// amplitude, so the whole tensor has unit squared norm.
#[derive(Debug, Clone, PartialEq)]
pub struct CountState {
    p_size: usize,
    n: usize,
    data_dim: usize,
    amps: Vec<C64>,
}

impl CountState {
    pub fn p_size(&self) -> usize {
        self.p_size
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn amplitude(&self, m: usize, a: usize, d: usize) -> C64 {
        self.amps[(m * self.n + a) * self.data_dim + d]
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm2(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Probability mass on a set of ancilla outcomes.
    pub fn window_mass(&self, outcomes: &[usize]) -> f64 {
        let dist = ancilla_distribution(self);
        outcomes.iter().map(|&c| dist[c]).sum()
    }
}

/// Runs the counting circuit with the default amplitude budget.
pub fn build_count_state(state: &EntangledState, good: &GoodSet, p: usize) -> Result<CountState> {
    build_count_state_within(state, good, p, AmplitudeBudget::default())
}

/// Runs the counting circuit: `P − 1` incremental Grover steps fill the
/// ancilla slabs, then one QFT along the ancilla index.
pub fn build_count_state_within(
    state: &EntangledState,
    good: &GoodSet,
    p: usize,
    budget: AmplitudeBudget,
) -> Result<CountState> {
    if p == 0 || !p.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(p));
    }
    if good.n() != state.len() {
        return Err(Error::DimensionMismatch(format!(
            "good set is over {} indices, state has {}",
            good.n(),
            state.len()
        )));
    }
    let lane = state.coeffs().len();
    let total = lane.checked_mul(p).ok_or(Error::MemoryLimit {
        requested: usize::MAX,
        limit: budget.0,
    })?;
    budget.check(total)?;

    let scale = ((state.len() * p) as f64).sqrt().recip();
    let mut amps = Vec::with_capacity(total);
    let mut cur = state.clone();
    for m in 0..p {
        amps.extend(cur.coeffs().iter().map(|z| z * scale));
        if m + 1 < p {
            grover_step_in_place(&mut cur, good);
        }
    }
    qft::transform_blocks(&mut amps, p, lane, false)?;
    Ok(CountState {
        p_size: p,
        n: state.len(),
        data_dim: state.data_dim(),
        amps,
    })
}

/// `prob(c) = Σ_{a,d} |amps(c, a, d)|²`.
pub fn ancilla_distribution(cs: &CountState) -> Vec<f64> {
    cs.amps
        .chunks(cs.n * cs.data_dim)
        .map(|slab| slab.iter().map(|z| z.norm_sqr()).sum())
        .collect()
}

/// One distinct sampled outcome and how often it was drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeCount {
    pub m: usize,
    pub count: usize,
    pub t_tilde: f64,
    pub in_window: bool,
}

/// Result of a sampled counting run with majority-rule estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    #[serde(rename = "P")]
    pub p: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub t_true: usize,
    /// Window case of the true `f`; absent when `t ∈ {0, N}` or `P = 1`.
    pub case: Option<WindowCase>,
    #[serde(rename = "W_predicted")]
    pub w_predicted: Option<f64>,
    #[serde(rename = "W_empirical")]
    pub w_empirical: Option<f64>,
    pub window: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub outcomes: Vec<OutcomeCount>,
    /// Representative outcome (`f̃ ≤ P/2`) of the most frequent estimate.
    pub majority_m: usize,
    pub majority_t: f64,
    pub majority_in_window: bool,
    pub bound: f64,
    pub bound_satisfied: bool,
}

/// Simulates the circuit once, draws `repetitions` ancilla outcomes with a
/// seeded generator, and reports the most frequent estimate (ties go to the
/// smaller `f̃`).
pub fn run_count(
    state: &EntangledState,
    good: &GoodSet,
    p: usize,
    repetitions: usize,
    seed: u64,
) -> Result<CountReport> {
    run_count_within(
        state,
        good,
        p,
        repetitions,
        seed,
        AmplitudeBudget::default(),
    )
}

pub fn run_count_within(
    state: &EntangledState,
    good: &GoodSet,
    p: usize,
    repetitions: usize,
    seed: u64,
    budget: AmplitudeBudget,
) -> Result<CountReport> {
    if repetitions == 0 {
        return Err(Error::InvalidDimensions(
            "repetitions must be at least 1".into(),
        ));
    }
    let cs = build_count_state_within(state, good, p, budget)?;
    let dist = ancilla_distribution(&cs);
    let n = state.len();
    let t = good.t();

    let prediction = if t > 0 && t < n && p >= 2 {
        Some(window_probability(&moments(state, good)?, p)?)
    } else {
        None
    };
    let window = prediction
        .as_ref()
        .map(|w| w.outcomes.clone())
        .unwrap_or_default();

    let sampler = WeightedIndex::new(&dist)
        .map_err(|e| Error::Degenerate(format!("ancilla distribution cannot be sampled: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..repetitions {
        *histogram.entry(sampler.sample(&mut rng)).or_default() += 1;
    }

    let mut by_estimate: BTreeMap<usize, usize> = BTreeMap::new();
    for (&m, &count) in &histogram {
        let f = if 2 * m <= p { m } else { p - m };
        *by_estimate.entry(f).or_default() += count;
    }
    let (majority_m, _) = by_estimate.iter().fold(
        (0, 0),
        |best, (&f, &c)| if c > best.1 { (f, c) } else { best },
    );
    let majority = estimate_from_outcome(majority_m, p, n);

    let in_window = |m: usize| window.contains(&m);
    let w_empirical = prediction.as_ref().map(|_| {
        histogram
            .iter()
            .filter(|(&m, _)| in_window(m))
            .map(|(_, &c)| c)
            .sum::<usize>() as f64
            / repetitions as f64
    });
    let bound = error_bound(t as f64, p, n);
    Ok(CountReport {
        p,
        n,
        t_true: t,
        case: prediction.as_ref().map(|w| w.case),
        w_predicted: prediction.as_ref().map(|w| w.w),
        w_empirical,
        outcomes: histogram
            .iter()
            .map(|(&m, &count)| OutcomeCount {
                m,
                count,
                t_tilde: estimate_from_outcome(m, p, n).t_tilde,
                in_window: in_window(m),
            })
            .collect(),
        majority_in_window: in_window(majority_m) || in_window((p - majority_m) % p),
        majority_m,
        majority_t: majority.t_tilde,
        bound_satisfied: (majority.t_tilde - t as f64).abs() <= bound,
        bound,
        window,
        repetitions,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_register() {
        let s = EntangledState::new_flat(2, 1).unwrap();
        let g = GoodSet::new(4, vec![1]).unwrap();
        let cs = build_count_state(&s, &g, 1).unwrap();
        assert_eq!(ancilla_distribution(&cs), vec![1.0]);
    }

    #[test]
    fn unitarity() {
        let g = GoodSet::random(16, 3, 4).unwrap();
        let s = EntangledState::random(4, 2, &g, 4).unwrap();
        for p in [2, 8, 32] {
            let cs = build_count_state(&s, &g, p).unwrap();
            assert!((cs.norm2() - 1.0).abs() < 1e-12);
            assert!((ancilla_distribution(&cs).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_distribution_is_symmetric() {
        let s = EntangledState::new_flat(4, 1).unwrap();
        let g = GoodSet::new(16, vec![1, 2, 3, 4]).unwrap();
        let d = ancilla_distribution(&build_count_state(&s, &g, 16).unwrap());
        for m in 1..16 {
            assert!((d[m] - d[16 - m]).abs() < 1e-9);
        }
        assert!(d[2] + d[3] + d[13] + d[14] > 0.5);
    }

    #[test]
    fn flat_four_peaks() {
        let s = EntangledState::new_flat(2, 1).unwrap();
        let g = GoodSet::new(4, vec![0]).unwrap();
        let d = ancilla_distribution(&build_count_state(&s, &g, 8).unwrap());
        let argmax = (0..8).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        assert!([1, 2, 6, 7].contains(&argmax));
    }

    #[test]
    fn rejects_bad_register_and_budget() {
        let s = EntangledState::new_flat(2, 1).unwrap();
        let g = GoodSet::new(4, vec![0]).unwrap();
        assert_eq!(build_count_state(&s, &g, 3), Err(Error::NotPowerOfTwo(3)));
        assert!(matches!(
            build_count_state_within(&s, &g, 64, AmplitudeBudget(100)),
            Err(Error::MemoryLimit {
                requested: 256,
                limit: 100
            })
        ));
    }

    #[test]
    fn empty_good_set_stays_at_zero() {
        let s = EntangledState::new_flat(4, 1).unwrap();
        let r = run_count(&s, &GoodSet::empty(16), 16, 25, 3).unwrap();
        assert_eq!(r.majority_m, 0);
        assert_eq!(r.majority_t, 0.0);
        assert!(r.case.is_none());
        assert!(r.bound_satisfied);
    }

    #[test]
    fn single_repetition_is_deterministic() {
        let s = EntangledState::new_flat(4, 1).unwrap();
        let g = GoodSet::new(16, vec![1, 2, 3, 4]).unwrap();
        let a = run_count(&s, &g, 16, 1, 99).unwrap();
        let b = run_count(&s, &g, 16, 1, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcomes.len(), 1);
        assert!(run_count(&s, &g, 16, 0, 99).is_err());
    }

    #[test]
    fn majority_lands_in_window() {
        let s = EntangledState::new_flat(4, 1).unwrap();
        let g = GoodSet::new(16, vec![1, 2, 3, 4]).unwrap();
        let r = run_count(&s, &g, 16, 101, 7).unwrap();
        assert_eq!(r.window, vec![2, 3, 13, 14]);
        assert!(r.majority_in_window);
        assert!(r.w_empirical.unwrap() > 0.5);
        assert!(r.bound_satisfied);
        assert!((r.bound - 3.758).abs() < 1e-3);
    }
}
