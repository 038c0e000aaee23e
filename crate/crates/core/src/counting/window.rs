//! Ancilla peak kernels, window probabilities and the `t` estimator.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::f_plus_minus;
use crate::qstate::inner;
use crate::{Error, MomentSummary, Result};

/// Distance to the nearest integer below which `f = Pθ/π` is treated as an exact peak.
pub const INTEGER_PEAK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `s±_m = sin π(m ± f) / (P sin[π(m ± f)/P])`.
///
/// The removable singularity at `m ± f = kP` takes its limit `(−1)^{k(P−1)}`,
/// which is `1` for `k = 0`.
pub fn kernel_s(m: usize, f: f64, p: usize, sign: Sign) -> f64 {
    let x = match sign {
        Sign::Plus => m as f64 + f,
        Sign::Minus => m as f64 - f,
    };
    let pf = p as f64;
    let k = (x / pf).round();
    let r = x - k * pf;
    let parity = if (k as i64 * (p as i64 - 1)) % 2 == 0 {
        1.0
    } else {
        -1.0
    };
    if r.abs() < 1e-12 {
        return parity;
    }
    parity * (PI * r).sin() / (pf * (PI * r / pf).sin())
}

/// Which outcome window the peak position `f = Pθ/π` selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCase {
    /// `0 < f < 1`: outcomes `{0, 1, P−1}`.
    Low,
    /// `1 < f < P/2 − 1`: outcomes `{f⁻, f⁺, P−f⁺, P−f⁻}` with `f⁻ = ⌊f⌋`, `f⁺ = ⌊f⌋ + 1`.
    Interior,
    /// `P/2 − 1 < f < P/2`: outcomes `{P/2 − 1, P/2, P/2 + 1}`.
    High,
    /// Integer `f`: outcomes `{f, P − f}`.
    ExactPeak,
}

impl WindowCase {
    pub fn as_str(self) -> &'static str {
        match self {
            WindowCase::Low => "low",
            WindowCase::Interior => "interior",
            WindowCase::High => "high",
            WindowCase::ExactPeak => "exact_peak",
        }
    }
}

/// Peak position, window case and the (sorted, distinct) window outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakWindow {
    pub case: WindowCase,
    pub f: f64,
    pub outcomes: Vec<usize>,
}

fn check_register(p: usize) -> Result<()> {
    if p < 2 || !p.is_power_of_two() {
        return Err(Error::InvalidDimensions(format!(
            "ancilla register size must be a power of two >= 2, got {p}"
        )));
    }
    Ok(())
}

/// Window for Grover angle `θ ∈ (0, π/2)` and register size `P`.
///
/// For `P = 2` the low and high intervals coincide; the low window is used.
pub fn peak_window(theta: f64, p: usize) -> Result<PeakWindow> {
    check_register(p)?;
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(Error::Degenerate(format!("no peak window for θ = {theta}")));
    }
    let f = p as f64 * theta / PI;
    let half = p / 2;
    let nearest = f.round();
    let (case, raw): (WindowCase, Vec<usize>) = if (f - nearest).abs() < INTEGER_PEAK_TOL {
        let k = nearest as usize;
        (WindowCase::ExactPeak, vec![k, p - k])
    } else if f < 1.0 {
        (WindowCase::Low, vec![0, 1, p - 1])
    } else if f < half as f64 - 1.0 {
        let lo = f.floor() as usize;
        (WindowCase::Interior, vec![lo, lo + 1, p - lo - 1, p - lo])
    } else {
        (WindowCase::High, vec![half - 1, half, half + 1])
    };
    let outcomes: BTreeSet<usize> = raw.into_iter().map(|c| c % p).collect();
    Ok(PeakWindow {
        case,
        f,
        outcomes: outcomes.into_iter().collect(),
    })
}

/// `Σ_{c ∈ outcomes} (s⁺_c)²`.
pub fn sigma_sum(f: f64, p: usize, outcomes: &[usize]) -> f64 {
    outcomes
        .iter()
        .map(|&c| kernel_s(c, f, p, Sign::Plus).powi(2))
        .sum()
}

/// Predicted probability of the ancilla landing in its peak window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPrediction {
    pub case: WindowCase,
    pub f: f64,
    pub outcomes: Vec<usize>,
    pub sigma: f64,
    pub w: f64,
}

/// Window probability from the sector moments.
///
/// With `S = sin²θ ⟨Ḡ|Ḡ⟩ + cos²θ ⟨B̄|B̄⟩`:
///
/// ```text
/// interior, exact peak   W₁ = S Σ₁
/// low                    W₂ = {N₁ + N[(Σ₂ − 1) sin²θ ⟨Ḡ|Ḡ⟩ + Σ₂ cos²θ ⟨B̄|B̄⟩]} / N
/// high                   W₃ = 1 − {N₁ − N[Σ₃ sin²θ ⟨Ḡ|Ḡ⟩ + (Σ₃ − 1) cos²θ ⟨B̄|B̄⟩]} / N
/// ```
///
/// For `P = 2` the low window also contains `P/2`, which collects the bad
/// sector's variance `cos²θ σ_B²` on top of `W₂`.
pub fn window_probability(m: &MomentSummary, p: usize) -> Result<WindowPrediction> {
    m.sectors()?;
    let win = peak_window(m.theta, p)?;
    let sigma = sigma_sum(win.f, p, &win.outcomes);
    let (sin2, cos2) = (m.sin2(), m.cos2());
    let (gg, bb) = (m.g_norm2(), m.b_norm2());
    let n = m.n as f64;
    let w = match win.case {
        WindowCase::Interior | WindowCase::ExactPeak => (sin2 * gg + cos2 * bb) * sigma,
        WindowCase::Low => {
            let w2 = (m.n_good_mass + n * ((sigma - 1.0) * sin2 * gg + sigma * cos2 * bb)) / n;
            if win.outcomes.contains(&(p / 2)) {
                w2 + cos2 * m.var_b()
            } else {
                w2
            }
        }
        WindowCase::High => {
            1.0 - (m.n_good_mass - n * (sigma * sin2 * gg + (sigma - 1.0) * cos2 * bb)) / n
        }
    };
    Ok(WindowPrediction {
        case: win.case,
        f: win.f,
        outcomes: win.outcomes,
        sigma,
        w,
    })
}

/// Full predicted ancilla distribution from the sector moments:
///
/// ```text
/// prob(c) = ½ cos²θ [(s⁺_c)² ‖F⁺‖² + (s⁻_c)² ‖F⁻‖²]
///         + δ_{c,0} sin²θ σ_G² + δ_{c,P/2} cos²θ σ_B²
/// ```
///
/// The good-sector spread is constant under `G_H` and the bad-sector spread
/// alternates sign, so they land exactly on outcomes `0` and `P/2`.
pub fn predicted_ancilla_distribution(m: &MomentSummary, p: usize) -> Result<Vec<f64>> {
    if p == 0 || !p.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(p));
    }
    let (fp, fm) = f_plus_minus(m)?;
    let cos2 = m.cos2();
    let vp = cos2 * inner(&fp, &fp).re;
    let vm = cos2 * inner(&fm, &fm).re;
    let f = p as f64 * m.theta / PI;
    let mut out: Vec<f64> = (0..p)
        .map(|c| {
            0.5 * (kernel_s(c, f, p, Sign::Plus).powi(2) * vp
                + kernel_s(c, f, p, Sign::Minus).powi(2) * vm)
        })
        .collect();
    out[0] += m.sin2() * m.var_g();
    out[p / 2] += cos2 * m.var_b();
    Ok(out)
}

/// `|t̃ − t| ≤ πN [π/P + 2√(t/N)] / P`.
pub fn error_bound(t: f64, p: usize, n: usize) -> f64 {
    let (pf, nf) = (p as f64, n as f64);
    PI * nf * (PI / pf + 2.0 * (t / nf).sqrt()) / pf
}

/// Estimate of `t` read off one ancilla measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEstimate {
    pub measured_m: usize,
    pub f_tilde: f64,
    pub theta_tilde: f64,
    pub t_tilde: f64,
    /// [`error_bound`] evaluated at the estimate itself.
    pub error_bound: f64,
    pub case_label: WindowCase,
}

/// `f̃ = m` or `P − m` (whichever is `≤ P/2`), `θ̃ = πf̃/P`, `t̃ = N sin²θ̃`.
///
/// The case label places `f̃` in the window family it can belong to:
/// `low` for `f̃ ≤ 1`, `high` for `f̃ ≥ P/2 − 1`, `interior` otherwise.
pub fn estimate_from_outcome(measured_m: usize, p: usize, n: usize) -> CountEstimate {
    assert!(
        measured_m < p.max(1),
        "outcome {measured_m} out of range for P = {p}"
    );
    let f_int = if 2 * measured_m <= p {
        measured_m
    } else {
        p - measured_m
    };
    let f_tilde = f_int as f64;
    let theta_tilde = PI * f_tilde / p as f64;
    let t_tilde = n as f64 * theta_tilde.sin().powi(2);
    let case_label = if f_int <= 1 {
        WindowCase::Low
    } else if 2 * f_int + 2 >= p {
        WindowCase::High
    } else {
        WindowCase::Interior
    };
    CountEstimate {
        measured_m,
        f_tilde,
        theta_tilde,
        t_tilde,
        error_bound: error_bound(t_tilde, p, n),
        case_label,
    }
}
