//! Closed-form predictions for `G_H^n` acting on an entangled state.
//!
//! Everything here depends on the initial state only through its sector
//! moments (see [`MomentSummary`]), except the row formulas which also need
//! the initial rows themselves.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::qstate::{inner, moments};
use crate::{EntangledState, Error, GoodSet, MomentSummary, Result, C64};

/// Oscillation amplitudes `ΔP e^{−2φ_I}` at or below this are treated as a
/// constant probability law.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Distance to the nearest integer accepted for an exact optimal time.
pub const INTEGER_TIME_TOL: f64 = 1e-9;

/// Parameters of `P(n) = P_AV − ΔP cos 2(2nθ − φ_R) e^{−2φ_I}`.
///
/// `degenerate` is set when `⟨F⁺|F⁻⟩` vanishes: `P(n) ≡ P_AV` and `φ` is
/// undefined (stored as `φ_R = 0`, `φ_I = ∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationParams {
    pub p_av: f64,
    pub delta_p: f64,
    pub phi_r: f64,
    pub phi_i: f64,
    pub theta: f64,
    pub degenerate: bool,
}

impl OscillationParams {
    /// `e^{−2φ_I}`, zero for a degenerate law.
    pub fn damping(&self) -> f64 {
        if self.degenerate {
            0.0
        } else {
            (-2.0 * self.phi_i).exp()
        }
    }

    /// Half the peak-to-peak swing of `P(n)`: `ΔP e^{−2φ_I}`.
    pub fn amplitude(&self) -> f64 {
        self.delta_p * self.damping()
    }

    /// `P(n)` at a real-valued time, without clamping.
    pub fn probability_at(&self, n: f64) -> f64 {
        if self.degenerate {
            return self.p_av;
        }
        self.p_av - self.amplitude() * (2.0 * (2.0 * n * self.theta - self.phi_r)).cos()
    }
}

/// `|F⁰±⟩ = |B̄⁰⟩ ± i tanθ |Ḡ⁰⟩`.
pub fn f_plus_minus(m: &MomentSummary) -> Result<(Vec<C64>, Vec<C64>)> {
    let (g, b) = m.sectors()?;
    let tan = (m.t as f64 / (m.n - m.t) as f64).sqrt();
    let plus = b
        .mean
        .iter()
        .zip(&g.mean)
        .map(|(bb, gg)| bb + C64::i() * tan * gg)
        .collect();
    let minus = b
        .mean
        .iter()
        .zip(&g.mean)
        .map(|(bb, gg)| bb - C64::i() * tan * gg)
        .collect();
    Ok((plus, minus))
}

/// Oscillation parameters from the sector moments.
///
/// `e^{2iφ} = 2⟨F⁺|F⁻⟩ / (⟨F⁺|F⁺⟩ + ⟨F⁻|F⁻⟩)`, with `φ_R` the half principal
/// argument in `(−π/2, π/2]` and `φ_I = −½ ln |e^{2iφ}|`.
/// `ΔP = ½ cos²θ (⟨B̄|B̄⟩ + tan²θ ⟨Ḡ|Ḡ⟩)` and `P_AV = 1 − ΔP − σ_B² cos²θ`.
pub fn oscillation_params(m: &MomentSummary) -> Result<OscillationParams> {
    let (f_plus, f_minus) = f_plus_minus(m)?;
    let cos2 = m.cos2();
    let overlap = inner(&f_plus, &f_minus);
    let denom = inner(&f_plus, &f_plus).re + inner(&f_minus, &f_minus).re;
    let delta_p = 0.25 * cos2 * denom;
    let p_av = 1.0 - delta_p - m.var_b() * cos2;
    let amplitude = 0.5 * cos2 * overlap.norm();
    if amplitude <= DEGENERACY_TOL {
        return Ok(OscillationParams {
            p_av,
            delta_p,
            phi_r: 0.0,
            phi_i: f64::INFINITY,
            theta: m.theta,
            degenerate: true,
        });
    }
    let e2iphi = overlap * 2.0 / denom;
    Ok(OscillationParams {
        p_av,
        delta_p,
        phi_r: 0.5 * e2iphi.im.atan2(e2iphi.re),
        phi_i: (-0.5 * e2iphi.norm().ln()).max(0.0),
        theta: m.theta,
        degenerate: false,
    })
}

/// `P(n)` clamped to `[0, 1]`; `P_AV` for a degenerate law.
pub fn success_probability(p: &OscillationParams, n: u64) -> f64 {
    p.probability_at(n as f64).clamp(0.0, 1.0)
}

/// Real-valued maximizing time `n_j = [π(2j+1)/2 + φ_R] / 2θ`.
pub fn optimal_time(p: &OscillationParams, j: u32) -> Result<f64> {
    if p.degenerate {
        return Err(Error::NoOptimum);
    }
    Ok((PI * (2 * j + 1) as f64 / 2.0 + p.phi_r) / (2.0 * p.theta))
}

/// Whichever of `⌊n₀⌋`, `⌈n₀⌉` gives the larger `P`; ties go to the smaller.
pub fn best_integer_time(p: &OscillationParams) -> Result<u64> {
    let n0 = optimal_time(p, 0)?;
    let lo = n0.floor().max(0.0) as u64;
    let hi = n0.ceil().max(0.0) as u64;
    if success_probability(p, hi) > success_probability(p, lo) {
        Ok(hi)
    } else {
        Ok(lo)
    }
}

/// `P_MAX = P_AV + ΔP e^{−2φ_I}`.
pub fn p_max(p: &OscillationParams) -> f64 {
    p.p_av + p.amplitude()
}

struct RowCoefficients {
    g_avg: Vec<C64>,
    b_avg: Vec<C64>,
    tan: f64,
    cot: f64,
}

fn row_coefficients(m: &MomentSummary) -> Result<RowCoefficients> {
    let (g, b) = m.sectors().map_err(|_| {
        Error::Degenerate(format!(
            "closed form is singular at θ ∈ {{0, π/2}} (t = {}, N = {})",
            m.t, m.n
        ))
    })?;
    let ratio = m.t as f64 / (m.n - m.t) as f64;
    Ok(RowCoefficients {
        g_avg: g.mean.clone(),
        b_avg: b.mean.clone(),
        tan: ratio.sqrt(),
        cot: ratio.recip().sqrt(),
    })
}

/// Rows of `G_H^n |ψ⟩` from the initial rows and sector averages:
///
/// ```text
/// f_g⁽ⁿ⁾ = f_g − (1 − cos 2nθ) Ḡ + cotθ sin 2nθ B̄
/// f_b⁽ⁿ⁾ = f_b − tanθ sin 2nθ Ḡ − (1 − cos 2nθ) B̄      (n even)
/// f_b⁽ⁿ⁾ = −f_b − tanθ sin 2nθ Ḡ + (1 + cos 2nθ) B̄     (n odd)
/// ```
pub fn closed_form_rows(state0: &EntangledState, good: &GoodSet, n: u64) -> Result<EntangledState> {
    let m = moments(state0, good)?;
    let k = row_coefficients(&m)?;
    if n == 0 {
        return Ok(state0.clone());
    }
    let x = 2.0 * n as f64 * m.theta;
    let (sin, cos) = x.sin_cos();
    let odd = n % 2 == 1;
    let mut coeffs = Vec::with_capacity(state0.coeffs().len());
    for (a, row) in state0.rows().enumerate() {
        let terms = row.iter().zip(&k.g_avg).zip(&k.b_avg);
        if good.contains(a) {
            coeffs.extend(terms.map(|((f, g), b)| f - g * (1.0 - cos) + b * (k.cot * sin)));
        } else if odd {
            coeffs.extend(terms.map(|((f, g), b)| -f - g * (k.tan * sin) + b * (1.0 + cos)));
        } else {
            coeffs.extend(terms.map(|((f, g), b)| f - g * (k.tan * sin) - b * (1.0 - cos)));
        }
    }
    Ok(state0.with_coeffs(coeffs))
}

/// `(X_n, Y_n)` from `Z_n = M Z_{n−1} + C_n (1, 1)` with `Z_0 = 0`, where
/// `M = cos2θ (I + σ_x) + iσ_y` and `C_n = t Ḡ + (−1)ⁿ (N − t) B̄`.
///
/// `n = 0` gives zero vectors, consistent with `X_1 = Y_1 = C_1`.
pub fn recurrence_vectors(m: &MomentSummary, n: u64) -> Result<(Vec<C64>, Vec<C64>)> {
    let (g, b) = m.sectors()?;
    let cos2t = 1.0 - 2.0 * m.sin2();
    let t = m.t as f64;
    let bad = (m.n - m.t) as f64;
    let dim = g.mean.len();
    let mut x = vec![C64::new(0.0, 0.0); dim];
    let mut y = x.clone();
    for k in 1..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        for d in 0..dim {
            let c = g.mean[d] * t + b.mean[d] * (sign * bad);
            let (xd, yd) = (x[d], y[d]);
            x[d] = xd * cos2t + yd * (1.0 + cos2t) + c;
            y[d] = xd * (cos2t - 1.0) + yd * cos2t + c;
        }
    }
    Ok((x, y))
}

/// Rows `f_g − (2/N) X_n` and `(−1)ⁿ f_b − (2/N) Y_n`.
pub fn rows_from_recurrence(
    state0: &EntangledState,
    good: &GoodSet,
    n: u64,
) -> Result<EntangledState> {
    let m = moments(state0, good)?;
    let (x, y) = recurrence_vectors(&m, n)?;
    let scale = 2.0 / state0.len() as f64;
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut coeffs = Vec::with_capacity(state0.coeffs().len());
    for (a, row) in state0.rows().enumerate() {
        if good.contains(a) {
            coeffs.extend(row.iter().zip(&x).map(|(f, xd)| f - xd * scale));
        } else {
            coeffs.extend(row.iter().zip(&y).map(|(f, yd)| f * parity - yd * scale));
        }
    }
    Ok(state0.with_coeffs(coeffs))
}

/// The state at an exact optimal time `n_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalState {
    pub j: u32,
    pub n: u64,
    pub state: EntangledState,
    /// `(1/N) Σ_g ‖f_g⁽ⁿʲ⁾‖²`.
    pub good_mass: f64,
    /// `(1/N) Σ_b ‖f_b⁽ⁿʲ⁾‖²`; vanishes when `σ_B² = 0` and `φ_I = 0`.
    pub bad_mass: f64,
}

fn exact_optimal_time(p: &OscillationParams, j: u32) -> Result<u64> {
    let nj = optimal_time(p, j)?;
    let rounded = nj.round();
    if (nj - rounded).abs() > INTEGER_TIME_TOL || rounded < 0.0 {
        return Err(Error::NonIntegerTime { j, time: nj });
    }
    Ok(rounded as u64)
}

/// Closed-form rows at `n_j`, which must be an integer to within [`INTEGER_TIME_TOL`].
pub fn state_at_optimal(state0: &EntangledState, good: &GoodSet, j: u32) -> Result<OptimalState> {
    let m = moments(state0, good)?;
    let p = oscillation_params(&m)?;
    let n = exact_optimal_time(&p, j)?;
    let state = closed_form_rows(state0, good, n)?;
    let good_mass = state.good_mass(good);
    Ok(OptimalState {
        j,
        n,
        bad_mass: state.physical_norm2() - good_mass,
        good_mass,
        state,
    })
}

/// Good rows at `n_j` in phase form:
/// `f_g − (1 + (−1)ʲ sinφ_R) Ḡ + (−1)ʲ cosφ_R cotθ B̄`.
pub fn optimal_good_rows(state0: &EntangledState, good: &GoodSet, j: u32) -> Result<Vec<Vec<C64>>> {
    let m = moments(state0, good)?;
    let p = oscillation_params(&m)?;
    if p.degenerate {
        return Err(Error::NoOptimum);
    }
    let k = row_coefficients(&m)?;
    let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let (sin, cos) = p.phi_r.sin_cos();
    let g_coef = 1.0 + sign * sin;
    let b_coef = sign * cos * k.cot;
    Ok(good
        .indices()
        .iter()
        .map(|&g| {
            state0
                .row(g)
                .iter()
                .zip(k.g_avg.iter().zip(&k.b_avg))
                .map(|(f, (ga, ba))| f - ga * g_coef + ba * b_coef)
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grover::grover_iterate;

    fn flat(q: u32, good: &[usize]) -> (EntangledState, GoodSet) {
        let s = EntangledState::new_flat(q, 1).unwrap();
        let g = GoodSet::new(s.len(), good.to_vec()).unwrap();
        (s, g)
    }

    fn params(s: &EntangledState, g: &GoodSet) -> OscillationParams {
        oscillation_params(&moments(s, g).unwrap()).unwrap()
    }

    #[test]
    fn f_plus_minus_flat_and_one_to_one() {
        let (s, g) = flat(2, &[1]);
        let (fp, fm) = f_plus_minus(&moments(&s, &g).unwrap()).unwrap();
        let k = 1.0 / 3f64.sqrt();
        assert!((fp[0] - C64::new(1.0, k)).norm() < 1e-15);
        assert!((fm[0] - C64::new(1.0, -k)).norm() < 1e-15);

        let s = EntangledState::one_to_one(1).unwrap();
        let g = GoodSet::new(2, vec![0]).unwrap();
        let (fp, fm) = f_plus_minus(&moments(&s, &g).unwrap()).unwrap();
        assert!((fp[0] - C64::i()).norm() < 1e-15 && (fp[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((fm[0] + C64::i()).norm() < 1e-15 && (fm[1] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(inner(&fp, &fm).norm() < 1e-15);
    }

    #[test]
    fn f_plus_minus_requires_both_sectors() {
        let (s, _) = flat(2, &[]);
        let m = moments(&s, &GoodSet::empty(4)).unwrap();
        assert!(matches!(f_plus_minus(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn flat_params() {
        for (q, t) in [(2, 1), (3, 2), (6, 1), (5, 7)] {
            let n = 1usize << q;
            let (s, g) = flat(q, &(0..t).collect::<Vec<_>>());
            let p = params(&s, &g);
            let theta = g.theta();
            assert!(!p.degenerate);
            assert!((p.phi_r + theta).abs() < 1e-12, "N={n} t={t}");
            assert!(p.phi_i.abs() < 1e-12);
            assert!((p.delta_p - 0.5).abs() < 1e-12);
            assert!((p.p_av - 0.5).abs() < 1e-12);
            assert!((p_max(&p) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_to_one_is_degenerate() {
        let s = EntangledState::one_to_one(1).unwrap();
        let g = GoodSet::new(2, vec![0]).unwrap();
        let p = params(&s, &g);
        assert!(p.degenerate);
        for n in 0..5 {
            assert!((success_probability(&p, n) - 0.5).abs() < 1e-12);
        }
        assert_eq!(optimal_time(&p, 0), Err(Error::NoOptimum));
        assert_eq!(p_max(&p), p.p_av);
    }

    #[test]
    fn flat_probabilities() {
        let (s, g) = flat(2, &[0]);
        let p = params(&s, &g);
        assert!((success_probability(&p, 1) - 1.0).abs() < 1e-12);
        let (s, g) = flat(6, &[9]);
        let p = params(&s, &g);
        let want = (13.0 * (1.0f64 / 8.0).asin()).sin().powi(2);
        assert!((success_probability(&p, 6) - want).abs() < 1e-12);
        assert!((want - 0.9966).abs() < 1e-4);
    }

    #[test]
    fn optimal_times_flat() {
        let (s, g) = flat(2, &[0]);
        let p = params(&s, &g);
        assert!((optimal_time(&p, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!((optimal_time(&p, 1).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(best_integer_time(&p).unwrap(), 1);
        assert!((success_probability(&p, 4) - 1.0).abs() < 1e-12);

        let (s, g) = flat(6, &[0]);
        let p = params(&s, &g);
        let n0 = optimal_time(&p, 0).unwrap();
        assert!((n0 - 5.767).abs() < 1e-3);
        assert_eq!(best_integer_time(&p).unwrap(), 6);
    }

    #[test]
    fn closed_form_zero_steps_is_identity() {
        let g = GoodSet::random(16, 5, 3).unwrap();
        let s = EntangledState::random(4, 2, &g, 3).unwrap();
        assert_eq!(closed_form_rows(&s, &g, 0).unwrap(), s);
    }

    #[test]
    fn closed_form_flat_one_step() {
        let (s, g) = flat(2, &[2]);
        let out = closed_form_rows(&s, &g, 1).unwrap();
        assert!((out.row(2)[0].norm_sqr() - 4.0).abs() < 1e-12);
        assert!(out.row(0)[0].norm() < 1e-12);
    }

    #[test]
    fn closed_form_refuses_singular_angles() {
        let (s, _) = flat(2, &[]);
        assert!(matches!(
            closed_form_rows(&s, &GoodSet::empty(4), 1),
            Err(Error::Degenerate(_))
        ));
        let all = GoodSet::new(4, vec![0, 1, 2, 3]).unwrap();
        assert!(matches!(
            closed_form_rows(&s, &all, 1),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn recurrence_first_step() {
        let (s, g) = flat(2, &[0]);
        let m = moments(&s, &g).unwrap();
        let (x, y) = recurrence_vectors(&m, 1).unwrap();
        // t Ḡ − (N − t) B̄ = 1 − 3
        assert_eq!(x, vec![C64::new(-2.0, 0.0)]);
        assert_eq!(y, x);
        let rows = rows_from_recurrence(&s, &g, 1).unwrap();
        assert!((rows.row(0)[0] - C64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn optimal_state_flat() {
        let (s, g) = flat(2, &[0]);
        let opt = state_at_optimal(&s, &g, 0).unwrap();
        assert_eq!(opt.n, 1);
        assert!(opt.bad_mass.abs() < 1e-12);
        assert!((opt.state.row(0)[0] - C64::new(2.0, 0.0)).norm() < 1e-12);
        let rows = optimal_good_rows(&s, &g, 0).unwrap();
        assert!((rows[0][0] - C64::new(2.0, 0.0)).norm() < 1e-12);

        let opt1 = state_at_optimal(&s, &g, 1).unwrap();
        assert_eq!(opt1.n, 4);
        let d0 = opt.state.search_distribution();
        let d1 = grover_iterate(&s, &g, 4).search_distribution();
        for (a, b) in d0.iter().zip(&d1) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_state_rejects_fractional_time() {
        let (s, g) = flat(6, &[0]);
        assert!(matches!(
            state_at_optimal(&s, &g, 0),
            Err(Error::NonIntegerTime { j: 0, .. })
        ));
    }
}
