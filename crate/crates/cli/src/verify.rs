//! `verify`: the acceptance criteria, each as a list of numeric checks.

use std::f64::consts::{PI, SQRT_2};

use entsearch_core::analytic::{
    best_integer_time, closed_form_rows, optimal_time, oscillation_params, p_max,
    rows_from_recurrence,
};
use entsearch_core::counting::{
    ancilla_distribution, build_count_state, error_bound, estimate_from_outcome, peak_window,
    run_count, sigma_sum, window_probability,
};
use entsearch_core::grover::grover_step_in_place;
use entsearch_core::qstate::moments;
use entsearch_core::{
    EntangledState, GoodSet, MomentSummary, MomentTargets, OscillationParams, WindowCase, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::find::default_iterations;
use crate::report::Check;
use crate::scenario::{Tolerances, VerifySettings};
use crate::CliError;

pub const ALL_CRITERIA: [u8; 11] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CriterionResult {
    fn new(id: u8, checks: Vec<Check>) -> Self {
        CriterionResult {
            id,
            name: criterion_name(id).to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    /// One line: verdict, id, name and every check.
    pub fn summary_line(&self) -> String {
        let detail: Vec<String> = self.checks.iter().map(Check::describe).collect();
        format!(
            "{} [{:>2}] {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            detail.join("; ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyResult {
    pub criteria: Vec<CriterionResult>,
}

pub fn criterion_name(id: u8) -> &'static str {
    match id {
        1 => "closed-form fidelity",
        2 => "recurrence consistency",
        3 => "variance conservation",
        4 => "probability law",
        5 => "textbook reduction",
        6 => "degenerate cases",
        7 => "near-certain success",
        8 => "counting window",
        9 => "sufficient averages",
        10 => "estimator bound",
        11 => "determinism",
        _ => "unknown",
    }
}

/// Everything a criterion run depends on.
#[derive(Debug, Clone)]
pub struct VerifyContext {
    pub settings: VerifySettings,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub workers: usize,
}

fn sub_rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

/// Runs the selected criteria (all of them when `settings.criteria` is empty),
/// in increasing id order.
pub fn run_criteria(ctx: &VerifyContext) -> Result<Vec<CriterionResult>, CliError> {
    let mut ids: Vec<u8> = if ctx.settings.criteria.is_empty() {
        ALL_CRITERIA.to_vec()
    } else {
        ctx.settings.criteria.clone()
    };
    ids.sort_unstable();
    ids.dedup();
    if let Some(bad) = ids.iter().find(|&&i| !ALL_CRITERIA.contains(&i)) {
        return Err(CliError::Config(format!(
            "verify.criteria: no criterion {bad}"
        )));
    }
    let pool = pool(ctx.workers)?;
    let corpus = if ids.iter().any(|&i| i <= 4) {
        let entries = corpus(ctx.settings.corpus_size, ctx.seed)?;
        Some(pool.install(|| {
            entries
                .par_iter()
                .map(|(s, g)| corpus_stats(s, g, ctx.settings.max_iterations))
                .collect::<Result<Vec<_>, CliError>>()
        })?)
    } else {
        None
    };
    let stat = |f: fn(&CorpusStats) -> f64| corpus.iter().flatten().map(f).fold(0.0, f64::max);
    let tol = &ctx.tolerances;

    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let checks = match id {
            1 => vec![Check::at_most(
                "max |closed form - simulated| amplitude",
                stat(|c| c.row_dev),
                tol.amplitude,
            )],
            2 => vec![Check::at_most(
                "max |recurrence - closed form| amplitude",
                stat(|c| c.rec_dev),
                tol.amplitude,
            )],
            3 => vec![
                Check::at_most(
                    "max |var_g(n) - var_g(0)|",
                    stat(|c| c.var_g_dev),
                    tol.amplitude,
                ),
                Check::at_most(
                    "max |var_b(n) - var_b(0)|",
                    stat(|c| c.var_b_dev),
                    tol.amplitude,
                ),
            ],
            4 => {
                let mut c = vec![Check::at_most(
                    "max |P_analytic - P_simulated|",
                    stat(|c| c.prob_dev),
                    tol.probability,
                )];
                c.push(n_scaled_variant_control(tol)?);
                c
            }
            5 => textbook_reduction(tol)?,
            6 => degenerate_cases(tol)?,
            7 => near_certain(tol, ctx.seed)?,
            8 => counting_window(tol, &ctx.settings, ctx.seed)?,
            9 => sufficient_averages(tol, &ctx.settings, ctx.seed, &pool)?,
            10 => estimator_bound(ctx.seed, &pool)?,
            11 => determinism(ctx)?,
            _ => unreachable!(),
        };
        out.push(CriterionResult::new(id, checks));
    }
    Ok(out)
}

/// Seeded random corpus: `N ∈ {4, 8, 16, 64}`, `D ∈ {1, 2, 4}`, `0 < t < N`.
pub fn corpus(size: usize, seed: u64) -> Result<Vec<(EntangledState, GoodSet)>, CliError> {
    let mut rng = sub_rng(seed, 1);
    (0..size)
        .map(|_| {
            let q = [2u32, 3, 4, 6][rng.random_range(0..4)];
            let d = [1usize, 2, 4][rng.random_range(0..3)];
            let n = 1usize << q;
            let t = rng.random_range(1..n);
            let good = GoodSet::random(n, t, rng.random())?;
            let state = EntangledState::random(q, d, &good, rng.random())?;
            Ok((state, good))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct CorpusStats {
    row_dev: f64,
    rec_dev: f64,
    var_g_dev: f64,
    var_b_dev: f64,
    prob_dev: f64,
}

fn corpus_stats(
    state: &EntangledState,
    good: &GoodSet,
    max_iterations: u64,
) -> Result<CorpusStats, CliError> {
    let m0 = moments(state, good)?;
    let params = oscillation_params(&m0)?;
    let periods = default_iterations(m0.theta);
    let mut st = CorpusStats::default();
    let mut cur = state.clone();
    for n in 0..=max_iterations.max(periods) {
        if n > 0 {
            grover_step_in_place(&mut cur, good);
        }
        if n <= periods {
            st.prob_dev = st
                .prob_dev
                .max((params.probability_at(n as f64) - cur.good_mass(good)).abs());
        }
        if n <= max_iterations {
            let closed = closed_form_rows(state, good, n)?;
            st.row_dev = st.row_dev.max(closed.max_abs_diff(&cur));
            st.rec_dev = st
                .rec_dev
                .max(rows_from_recurrence(state, good, n)?.max_abs_diff(&closed));
            let mn = moments(&cur, good)?;
            st.var_g_dev = st.var_g_dev.max((mn.var_g() - m0.var_g()).abs());
            st.var_b_dev = st.var_b_dev.max((mn.var_b() - m0.var_b()).abs());
        }
    }
    Ok(st)
}

/// The probability law with `ΔP` scaled by `N` and the bad-variance term by
/// `N`, a form that only holds when the rows are normalized to one instead
/// of `N`.
pub fn n_scaled_variant(m: &MomentSummary) -> Result<OscillationParams, CliError> {
    let p = oscillation_params(m)?;
    let n = m.n as f64;
    let delta_p = n * p.delta_p;
    Ok(OscillationParams {
        p_av: 1.0 - delta_p - n * m.var_b() * m.cos2(),
        delta_p,
        ..p
    })
}

/// Largest deviation of a law from simulation over `0..=last`.
fn law_deviation(
    state: &EntangledState,
    good: &GoodSet,
    law: &OscillationParams,
    last: u64,
) -> f64 {
    let mut cur = state.clone();
    let mut dev = 0.0f64;
    for n in 0..=last {
        if n > 0 {
            grover_step_in_place(&mut cur, good);
        }
        dev = dev.max((law.probability_at(n as f64) - cur.good_mass(good)).abs());
    }
    dev
}

fn n_scaled_variant_control(tol: &Tolerances) -> Result<Check, CliError> {
    let state = EntangledState::new_flat(2, 1)?;
    let good = GoodSet::new(4, vec![0])?;
    let m = moments(&state, &good)?;
    let law = n_scaled_variant(&m)?;
    let dev = law_deviation(&state, &good, &law, default_iterations(m.theta));
    Ok(Check::above(
        "negative control: N-scaled coefficient variant deviation, flat N=4",
        dev,
        tol.probability,
    ))
}

fn textbook_reduction(tol: &Tolerances) -> Result<Vec<Check>, CliError> {
    let (mut sim_dev, mut law_dev, mut phase_dev) = (0.0f64, 0.0f64, 0.0f64);
    for q in 2..=8u32 {
        let n = 1usize << q;
        for t in [1, 2, n / 4, n / 2 - 1, n / 2 + 1, n - 1] {
            if t == 0 || t >= n {
                continue;
            }
            let state = EntangledState::new_flat(q, 1)?;
            let good = GoodSet::new(n, (0..t).map(|k| (k * 7919) % n).collect())?;
            let m = moments(&state, &good)?;
            let p = oscillation_params(&m)?;
            phase_dev = phase_dev.max((p.phi_r + m.theta).abs());
            let mut cur = state.clone();
            for k in 0..=default_iterations(m.theta) {
                if k > 0 {
                    grover_step_in_place(&mut cur, &good);
                }
                let want = ((2 * k + 1) as f64 * m.theta).sin().powi(2);
                sim_dev = sim_dev.max((cur.good_mass(&good) - want).abs());
                law_dev = law_dev.max((p.probability_at(k as f64) - want).abs());
            }
        }
    }
    let state = EntangledState::new_flat(2, 1)?;
    let good = GoodSet::new(4, vec![0])?;
    let p = oscillation_params(&moments(&state, &good)?)?;
    let mut one = state.clone();
    grover_step_in_place(&mut one, &good);
    Ok(vec![
        Check::at_most(
            "max |P_simulated - sin²((2n+1)θ)|, flat N ≤ 256",
            sim_dev,
            tol.reduction,
        ),
        Check::at_most(
            "max |P_analytic - sin²((2n+1)θ)|, flat N ≤ 256",
            law_dev,
            tol.reduction,
        ),
        Check::at_most("max |φ_R + θ|, flat", phase_dev, tol.reduction),
        Check::at_most(
            "|P(1) - 1|, N=4 t=1",
            (one.good_mass(&good) - 1.0).abs(),
            tol.reduction,
        ),
        Check::at_most(
            "|n0 - 1|, N=4 t=1",
            (optimal_time(&p, 0)? - 1.0).abs(),
            tol.reduction,
        ),
        Check::at_most(
            "|best integer time - 1|, N=4 t=1",
            best_integer_time(&p)?.abs_diff(1) as f64,
            0.0,
        ),
    ])
}

fn constant_law_deviation(
    state: &EntangledState,
    good: &GoodSet,
    value: f64,
    last: u64,
) -> Result<(f64, f64, bool), CliError> {
    let p = oscillation_params(&moments(state, good)?)?;
    let mut cur = state.clone();
    let (mut sim, mut law) = (0.0f64, 0.0f64);
    for n in 0..=last {
        if n > 0 {
            grover_step_in_place(&mut cur, good);
        }
        sim = sim.max((cur.good_mass(good) - value).abs());
        law = law.max((p.probability_at(n as f64) - value).abs());
    }
    Ok((sim, law, p.degenerate))
}

/// `N = 4` rows `(0, √2, −√2, 0)` with the single good item at 0: the good
/// row never acquires any weight.
pub fn fine_tuned_state() -> Result<(EntangledState, GoodSet), CliError> {
    let r = SQRT_2;
    let rows = [0.0, r, -r, 0.0]
        .iter()
        .map(|&x| vec![C64::new(x, 0.0)])
        .collect();
    Ok((
        EntangledState::from_amplitudes(rows, false)?,
        GoodSet::new(4, vec![0])?,
    ))
}

fn degenerate_cases(tol: &Tolerances) -> Result<Vec<Check>, CliError> {
    let (mut sim, mut law, mut not_degenerate) = (0.0f64, 0.0f64, 0usize);
    for q in 2..=4u32 {
        let n = 1usize << q;
        for t in [1, n / 2, n - 1] {
            let state = EntangledState::one_to_one(q)?;
            let good = GoodSet::random(n, t, (q as u64) << 8 | t as u64)?;
            let (s, l, d) = constant_law_deviation(&state, &good, t as f64 / n as f64, 30)?;
            sim = sim.max(s);
            law = law.max(l);
            not_degenerate += usize::from(!d);
        }
    }
    let (state, good) = fine_tuned_state()?;
    let (fs, fl, fd) = constant_law_deviation(&state, &good, 0.0, 30)?;
    Ok(vec![
        Check::at_most(
            "one-to-one: max |P_simulated - t/N|, n ≤ 30",
            sim,
            tol.probability,
        ),
        Check::at_most("one-to-one: max |P_analytic - t/N|", law, tol.probability),
        Check::at_most(
            "one-to-one states not flagged degenerate",
            not_degenerate as f64,
            0.0,
        ),
        Check::at_most("fine-tuned: max P_simulated, n ≤ 30", fs, tol.probability),
        Check::at_most("fine-tuned: max P_analytic", fl, tol.probability),
        Check::at_most(
            "fine-tuned state not flagged degenerate",
            f64::from(u8::from(!fd)),
            0.0,
        ),
    ])
}

/// A state with equal sector averages `√(1−ε) e₀` and bad variance
/// `ε / cos²θ`, so that `σ_B² cos²θ = ε` and `φ_I = 0`.
pub fn near_certain_state(
    n_qubits: u32,
    t: usize,
    eps: f64,
    seed: u64,
) -> Result<(EntangledState, GoodSet), CliError> {
    let n = 1usize << n_qubits;
    let good = GoodSet::new(n, (0..t).collect())?;
    let avg = vec![C64::new((1.0 - eps).sqrt(), 0.0), C64::new(0.0, 0.0)];
    let cos2 = (n - t) as f64 / n as f64;
    let targets = MomentTargets {
        var_g: 0.0,
        var_b: eps / cos2,
        g_avg: avg.clone(),
        b_avg: avg,
    };
    Ok((
        EntangledState::random_with_moments(n_qubits, &good, &targets, seed)?,
        good,
    ))
}

fn near_certain(tol: &Tolerances, seed: u64) -> Result<Vec<Check>, CliError> {
    let (mut pmax_dev, mut sim_dev, mut phi_i) = (0.0f64, 0.0f64, 0.0f64);
    let mut rng = sub_rng(seed, 7);
    for (q, t) in [(2u32, 1usize), (4, 4)] {
        for eps in [0.01, 0.05, 0.1] {
            let (state, good) = near_certain_state(q, t, eps, rng.random())?;
            let m = moments(&state, &good)?;
            let p = oscillation_params(&m)?;
            phi_i = phi_i.max(p.phi_i);
            pmax_dev = pmax_dev.max((p_max(&p) - (1.0 - eps)).abs());
            let best = best_integer_time(&p)?;
            let mut cur = state.clone();
            for _ in 0..best {
                grover_step_in_place(&mut cur, &good);
            }
            sim_dev = sim_dev.max((cur.good_mass(&good) - (1.0 - eps)).abs());
        }
    }
    Ok(vec![
        Check::at_most("max φ_I", phi_i, tol.amplitude),
        Check::at_most("max |P_MAX - (1 - ε)|", pmax_dev, tol.p_max),
        Check::at_most("max |P_simulated(best n) - (1 - ε)|", sim_dev, tol.p_max),
    ])
}

fn counting_window(
    tol: &Tolerances,
    settings: &VerifySettings,
    seed: u64,
) -> Result<Vec<Check>, CliError> {
    let state = EntangledState::new_flat(4, 1)?;
    let good = GoodSet::new(16, vec![1, 6, 10, 15])?;
    let pred = window_probability(&moments(&state, &good)?, 16)?;
    let dist = ancilla_distribution(&build_count_state(&state, &good, 16)?);
    let circuit: f64 = [2usize, 3, 13, 14].iter().map(|&m| dist[m]).sum();
    let window_mismatch = f64::from(u8::from(pred.outcomes != [2, 3, 13, 14]));

    let mut rng = sub_rng(seed, 8);
    let (mut lo, mut hi, mut wrong_case) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    for case in [WindowCase::Low, WindowCase::Interior, WindowCase::High] {
        let mut drawn = 0;
        while drawn < settings.sigma_samples {
            let p = 1usize << rng.random_range(3..=7);
            let half = (p / 2) as f64;
            let (a, b) = match case {
                WindowCase::Low => (0.0, 1.0),
                WindowCase::Interior => (1.0, half - 1.0),
                _ => (half - 1.0, half),
            };
            let f = a + (b - a) * rng.random::<f64>();
            if f <= a || f >= b || (f - f.round()).abs() < 1e-6 {
                continue;
            }
            let win = peak_window(PI * f / p as f64, p)?;
            wrong_case += usize::from(win.case != case);
            let s = sigma_sum(win.f, p, &win.outcomes);
            lo = lo.min(s);
            hi = hi.max(s);
            drawn += 1;
        }
    }
    Ok(vec![
        Check::at_most(
            "|W₁ - circuit mass on {2,3,13,14}|",
            (pred.w - circuit).abs(),
            tol.probability,
        ),
        Check::at_most(
            "predicted window differs from {2,3,13,14}",
            window_mismatch,
            0.0,
        ),
        Check::above("W₁, flat N=16 t=4 P=16", pred.w, 0.5),
        Check::above("min Σ over sampled f", lo, 8.0 / (PI * PI)),
        Check::at_most("max Σ - 1 over sampled f", hi - 1.0, tol.probability),
        Check::at_most(
            "sampled f assigned to the wrong case",
            wrong_case as f64,
            0.0,
        ),
    ])
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d)
            .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Threshold on the squared averages above which the window probability
/// exceeds one half.
pub fn averages_threshold() -> f64 {
    PI * PI / (8.0 * SQRT_2)
}

/// A random state with `⟨Ḡ|Ḡ⟩ ≥ ⟨B̄|B̄⟩ > π²/(8√2)` and the leftover norm
/// split at random between the two sector variances.
pub fn sufficient_averages_state(
    rng: &mut ChaCha8Rng,
    n_qubits: u32,
    t: usize,
    d: usize,
) -> Result<(EntangledState, GoodSet), CliError> {
    let n = 1usize << n_qubits;
    let good = GoodSet::random(n, t, rng.random())?;
    let (sin2, cos2) = (t as f64 / n as f64, (n - t) as f64 / n as f64);
    let b2 = rng.random_range(0.88..0.99);
    let g2 = rng.random_range(b2..1.0);
    let rest = 1.0 - sin2 * g2 - cos2 * b2;
    let u = match (t >= 2, n - t >= 2) {
        (true, true) => rng.random::<f64>(),
        (true, false) => 1.0,
        _ => 0.0,
    };
    let targets = MomentTargets {
        var_g: u * rest / sin2,
        var_b: (1.0 - u) * rest / cos2,
        g_avg: unit_vector(rng, d)
            .into_iter()
            .map(|z| z * g2.sqrt())
            .collect(),
        b_avg: unit_vector(rng, d)
            .into_iter()
            .map(|z| z * b2.sqrt())
            .collect(),
    };
    Ok((
        EntangledState::random_with_moments(n_qubits, &good, &targets, rng.random())?,
        good,
    ))
}

fn sufficient_averages(
    tol: &Tolerances,
    settings: &VerifySettings,
    seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<Vec<Check>, CliError> {
    let mut rng = sub_rng(seed, 9);
    let mut cases = Vec::with_capacity(settings.averages_states);
    for _ in 0..settings.averages_states {
        let q = rng.random_range(3..=6u32);
        let t = rng.random_range(1..(1usize << q));
        let d = [1usize, 2, 4][rng.random_range(0..3)];
        let p = 1usize << rng.random_range(2..=5);
        let (state, good) = sufficient_averages_state(&mut rng, q, t, d)?;
        cases.push((state, good, p));
    }
    let results = pool.install(|| {
        cases
            .par_iter()
            .map(|(state, good, p)| {
                let m = moments(state, good)?;
                let ok = m.g_norm2() >= m.b_norm2() && m.b_norm2() > averages_threshold();
                let pred = window_probability(&m, *p)?;
                let dist = ancilla_distribution(&build_count_state(state, good, *p)?);
                let circuit: f64 = pred.outcomes.iter().map(|&c| dist[c]).sum();
                Ok((ok, pred.w, circuit))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let off = results.iter().filter(|r| !r.0).count();
    let min_w = results.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let min_c = results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    let dev = results
        .iter()
        .map(|r| (r.1 - r.2).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("states violating the averages condition", off as f64, 0.0),
        Check::above("min predicted W", min_w, 0.5),
        Check::above("min circuit window mass", min_c, 0.5),
        Check::at_most("max |W_predicted - W_circuit|", dev, tol.probability),
    ])
}

struct BoundCell {
    outside: usize,
    w_above_half: bool,
    majority_failed: bool,
}

fn bound_cell(
    state: &EntangledState,
    good: &GoodSet,
    p: usize,
    seed: u64,
) -> Result<BoundCell, CliError> {
    let (n, t) = (state.len(), good.t());
    let pred = window_probability(&moments(state, good)?, p)?;
    let bound = error_bound(t as f64, p, n);
    let outside = pred
        .outcomes
        .iter()
        .filter(|&&m| (estimate_from_outcome(m, p, n).t_tilde - t as f64).abs() > bound)
        .count();
    let w_above_half = pred.w > 0.5;
    let majority_failed = if w_above_half {
        let r = run_count(state, good, p, 101, seed)?;
        !(r.majority_in_window && r.w_empirical.is_some_and(|w| w > 0.5))
    } else {
        false
    };
    Ok(BoundCell {
        outside,
        w_above_half,
        majority_failed,
    })
}

fn estimator_bound(seed: u64, pool: &rayon::ThreadPool) -> Result<Vec<Check>, CliError> {
    let mut rng = sub_rng(seed, 10);
    let mut cells = Vec::new();
    for q in [4u32, 6] {
        let n = 1usize << q;
        for p in [16usize, 32, 64] {
            for t in 1..=n / 4 {
                let good = GoodSet::random(n, t, rng.random())?;
                cells.push((
                    EntangledState::new_flat(q, 1)?,
                    good,
                    p,
                    rng.random::<u64>(),
                ));
            }
            for _ in 0..4 {
                let t = rng.random_range(1..=n / 4);
                let d = [1usize, 2][rng.random_range(0..2)];
                let (state, good) = sufficient_averages_state(&mut rng, q, t, d)?;
                cells.push((state, good, p, rng.random::<u64>()));
            }
        }
    }
    let results = pool.install(|| {
        cells
            .par_iter()
            .map(|(s, g, p, seed)| bound_cell(s, g, *p, *seed))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    let outside: usize = results.iter().map(|r| r.outside).sum();
    let eligible = results.iter().filter(|r| r.w_above_half).count();
    let failed = results.iter().filter(|r| r.majority_failed).count();
    Ok(vec![
        Check::at_most(
            "window outcomes outside the error bound",
            outside as f64,
            0.0,
        ),
        Check::above("cells with W > 1/2", eligible as f64, 0.0),
        Check::at_most(
            "majority runs outside the window or with frequency ≤ 1/2",
            failed as f64,
            0.0,
        ),
    ])
}

fn determinism(ctx: &VerifyContext) -> Result<Vec<Check>, CliError> {
    let mut inner = ctx.clone();
    inner.settings.criteria = ctx
        .settings
        .criteria
        .iter()
        .copied()
        .filter(|&i| i != 11)
        .collect();
    if inner.settings.criteria.is_empty() {
        inner.settings.criteria = (1..=10).collect();
    }
    let mut workers = ctx.settings.determinism_workers.clone();
    if workers.is_empty() {
        workers.push(1);
    }
    let mut outputs = Vec::new();
    for &w in &workers {
        inner.workers = w;
        for _ in 0..ctx.settings.determinism_runs.max(1) {
            let r = run_criteria(&inner)?;
            outputs.push(serde_json::to_string(&r).expect("criteria serialize"));
        }
    }
    let distinct = outputs
        .iter()
        .collect::<std::collections::BTreeSet<_>>()
        .len();
    Ok(vec![Check::at_most(
        format!("distinct serialized results over {} runs", outputs.len()),
        (distinct - 1) as f64,
        0.0,
    )])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_scaled_variant_gives_minus_two_on_flat_four() {
        let state = EntangledState::new_flat(2, 1).unwrap();
        let good = GoodSet::new(4, vec![0]).unwrap();
        let law = n_scaled_variant(&moments(&state, &good).unwrap()).unwrap();
        assert!((law.probability_at(0.0) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn sufficient_states_meet_condition() {
        let mut rng = sub_rng(5, 9);
        for _ in 0..20 {
            let (s, g) = sufficient_averages_state(&mut rng, 4, 3, 2).unwrap();
            let m = moments(&s, &g).unwrap();
            assert!(m.g_norm2() >= m.b_norm2() && m.b_norm2() > averages_threshold());
            assert!((m.normalization() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unknown_criterion_is_config_error() {
        let ctx = VerifyContext {
            settings: VerifySettings {
                criteria: vec![12],
                ..VerifySettings::default()
            },
            tolerances: Tolerances::default(),
            seed: 0,
            workers: 1,
        };
        assert!(matches!(run_criteria(&ctx), Err(CliError::Config(_))));
    }
}
