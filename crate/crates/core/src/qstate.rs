//! Entangled search-register states, marked sets and their sector moments.

use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{AmplitudeBudget, Error, Result, C64};

/// Absolute tolerance on `Σ_a ‖f_a‖² = N` accepted by the constructors.
pub const NORM_TOL: f64 = 1e-9;

/// Largest supported search register.
pub const MAX_QUBITS: u32 = 30;

/// The table of data vectors `f_a` of the state `(1/√N) Σ_a |a⟩|f_a⟩`.
///
/// Rows are stored row-major: entry `(a, d)` lives at `a * data_dim + d`.
/// Every constructed state satisfies `Σ_a ‖f_a‖² = N` to within [`NORM_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateFile", try_from = "StateFile")]
pub struct EntangledState {
    n_qubits: u32,
    data_dim: usize,
    coeffs: Vec<C64>,
}

/// On-disk JSON form: `{"n_qubits": n, "data_dim": D, "rows": [[[re, im], ...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n_qubits: u32,
    pub data_dim: usize,
    pub rows: Vec<Vec<[f64; 2]>>,
}

impl From<EntangledState> for StateFile {
    fn from(s: EntangledState) -> Self {
        let rows = s
            .coeffs
            .chunks(s.data_dim)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        StateFile {
            n_qubits: s.n_qubits,
            data_dim: s.data_dim,
            rows,
        }
    }
}

impl TryFrom<StateFile> for EntangledState {
    type Error = Error;

    fn try_from(file: StateFile) -> Result<Self> {
        let rows: Vec<Vec<C64>> = file
            .rows
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        let state = EntangledState::from_amplitudes(rows, false)?;
        if state.n_qubits != file.n_qubits || state.data_dim != file.data_dim {
            return Err(Error::DimensionMismatch(format!(
                "header says {} qubits x {} dims, table is {} x {}",
                file.n_qubits,
                file.data_dim,
                state.len(),
                state.data_dim
            )));
        }
        Ok(state)
    }
}

fn check_dims(n_qubits: u32, data_dim: usize) -> Result<usize> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidDimensions(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    if data_dim == 0 {
        return Err(Error::InvalidDimensions(
            "data_dim must be at least 1".into(),
        ));
    }
    let n = 1usize << n_qubits;
    let total = n
        .checked_mul(data_dim)
        .ok_or_else(|| Error::InvalidDimensions("table size overflows".into()))?;
    AmplitudeBudget::default().check(total)?;
    Ok(n)
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

impl EntangledState {
    /// The flat superposition: every row is the first data basis vector.
    pub fn new_flat(n_qubits: u32, data_dim: usize) -> Result<Self> {
        let n = check_dims(n_qubits, data_dim)?;
        let mut coeffs = vec![C64::new(0.0, 0.0); n * data_dim];
        for row in coeffs.chunks_mut(data_dim) {
            row[0] = C64::new(1.0, 0.0);
        }
        Ok(EntangledState {
            n_qubits,
            data_dim,
            coeffs,
        })
    }

    /// One-to-one entanglement `f_a = e_a` (data dimension equals `N`).
    pub fn one_to_one(n_qubits: u32) -> Result<Self> {
        let n = check_dims(n_qubits, 1)?;
        check_dims(n_qubits, n)?;
        let mut coeffs = vec![C64::new(0.0, 0.0); n * n];
        for a in 0..n {
            coeffs[a * n + a] = C64::new(1.0, 0.0);
        }
        Ok(EntangledState {
            n_qubits,
            data_dim: n,
            coeffs,
        })
    }

    /// Builds a state from an explicit `N × D` table of rows.
    ///
    /// With `renormalize` set, all rows are scaled by one global factor so that
    /// `Σ_a ‖f_a‖² = N`; otherwise the table must already satisfy it.
    pub fn from_amplitudes(rows: Vec<Vec<C64>>, renormalize: bool) -> Result<Self> {
        let n = rows.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let data_dim = rows[0].len();
        if rows.iter().any(|r| r.len() != data_dim) {
            return Err(Error::InvalidDimensions("rows have unequal lengths".into()));
        }
        let n_qubits = n.trailing_zeros();
        check_dims(n_qubits, data_dim)?;
        let coeffs = rows.into_iter().flatten().collect();
        Self::from_coeffs(n_qubits, data_dim, coeffs, renormalize)
    }

    /// Row-major variant of [`EntangledState::from_amplitudes`].
    pub fn from_coeffs(
        n_qubits: u32,
        data_dim: usize,
        mut coeffs: Vec<C64>,
        renormalize: bool,
    ) -> Result<Self> {
        let n = check_dims(n_qubits, data_dim)?;
        if coeffs.len() != n * data_dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                n * data_dim,
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidDimensions("non-finite coefficient".into()));
        }
        let sum = norm2(&coeffs);
        let expected = n as f64;
        if renormalize {
            if sum == 0.0 {
                return Err(Error::ZeroNorm);
            }
            if sum != expected {
                let scale = (expected / sum).sqrt();
                coeffs.iter_mut().for_each(|z| *z *= scale);
            }
        } else if (sum - expected).abs() > NORM_TOL {
            return Err(Error::Normalization { sum, expected });
        }
        Ok(EntangledState {
            n_qubits,
            data_dim,
            coeffs,
        })
    }

    /// Pseudo-random state with prescribed sector averages and variances.
    ///
    /// Good rows are `Ḡ + δ_g` and bad rows `B̄ + ε_b`, where the perturbations
    /// are complex Gaussian draws with their sample mean removed, then scaled
    /// so that `Σ_g ‖δ_g‖² / t` and `Σ_b ‖ε_b‖² / (N − t)` equal the targets.
    /// Finally the whole table is rescaled once to restore `Σ_a ‖f_a‖² = N`;
    /// when the targets already satisfy
    /// `t (σ_G² + ‖Ḡ‖²) + (N − t)(σ_B² + ‖B̄‖²) = N` that factor is one.
    pub fn random_with_moments(
        n_qubits: u32,
        good: &GoodSet,
        targets: &MomentTargets,
        seed: u64,
    ) -> Result<Self> {
        let data_dim = targets.g_avg.len();
        if targets.b_avg.len() != data_dim {
            return Err(Error::DimensionMismatch(
                "good and bad averages differ in dimension".into(),
            ));
        }
        let n = check_dims(n_qubits, data_dim)?;
        good.check_len(n)?;
        for (name, v) in [("var_g", targets.var_g), ("var_b", targets.var_b)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::ImpossibleTarget(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        let t = good.t();
        if t < 2 && targets.var_g > 0.0 {
            return Err(Error::ImpossibleTarget(format!(
                "{t} good rows cannot have variance {}",
                targets.var_g
            )));
        }
        if n - t < 2 && targets.var_b > 0.0 {
            return Err(Error::ImpossibleTarget(format!(
                "{} bad rows cannot have variance {}",
                n - t,
                targets.var_b
            )));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![C64::new(0.0, 0.0); n * data_dim];
        let bad: Vec<usize> = good.bad_indices().collect();
        for (rows, avg, var) in [
            (good.indices(), &targets.g_avg, targets.var_g),
            (bad.as_slice(), &targets.b_avg, targets.var_b),
        ] {
            let mut pert = zero_sum_perturbation(&mut rng, rows.len(), data_dim, var)?;
            for (k, &a) in rows.iter().enumerate() {
                let dst = &mut coeffs[a * data_dim..(a + 1) * data_dim];
                for d in 0..data_dim {
                    dst[d] = avg[d] + std::mem::take(&mut pert[k * data_dim + d]);
                }
            }
        }
        Self::from_coeffs(n_qubits, data_dim, coeffs, true)
    }

    /// A generic random entangled state: random complex averages, random
    /// variances where the sector size allows one.
    pub fn random(n_qubits: u32, data_dim: usize, good: &GoodSet, seed: u64) -> Result<Self> {
        let n = check_dims(n_qubits, data_dim)?;
        good.check_len(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g_avg: Vec<C64> = (0..data_dim).map(|_| gauss(&mut rng)).collect();
        let b_avg: Vec<C64> = (0..data_dim).map(|_| gauss(&mut rng)).collect();
        let var_g = if good.t() >= 2 {
            uniform(&mut rng)
        } else {
            0.0
        };
        let var_b = if n - good.t() >= 2 {
            uniform(&mut rng)
        } else {
            0.0
        };
        let targets = MomentTargets {
            var_g,
            var_b,
            g_avg,
            b_avg,
        };
        Self::random_with_moments(n_qubits, good, &targets, rng.next_u64())
    }

    pub fn n_qubits(&self) -> u32 {
        self.n_qubits
    }

    /// Search-space size `N`.
    pub fn len(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn row(&self, a: usize) -> &[C64] {
        &self.coeffs[a * self.data_dim..(a + 1) * self.data_dim]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, C64> {
        self.coeffs.chunks(self.data_dim)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// Builds a state sharing `self`'s shape from raw rows, skipping validation.
    pub(crate) fn with_coeffs(&self, coeffs: Vec<C64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        EntangledState {
            n_qubits: self.n_qubits,
            data_dim: self.data_dim,
            coeffs,
        }
    }

    /// `Σ_a ‖f_a‖²`, equal to `N` for a normalized state.
    pub fn total_mass(&self) -> f64 {
        norm2(&self.coeffs)
    }

    /// Physical norm `(1/N) Σ_a ‖f_a‖²`.
    pub fn physical_norm2(&self) -> f64 {
        self.total_mass() / self.len() as f64
    }

    /// Measurement distribution of the search register: `‖f_a‖² / N`.
    pub fn search_distribution(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.rows().map(|r| norm2(r) / n).collect()
    }

    /// Probability of measuring a good index: `(1/N) Σ_g ‖f_g‖²`.
    pub fn good_mass(&self, good: &GoodSet) -> f64 {
        good.indices()
            .iter()
            .map(|&g| norm2(self.row(g)))
            .sum::<f64>()
            / self.len() as f64
    }

    /// Largest entry-wise modulus difference to another state of the same shape.
    pub fn max_abs_diff(&self, other: &EntangledState) -> f64 {
        assert_eq!(self.coeffs.len(), other.coeffs.len(), "shape mismatch");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn gauss(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// `count` complex Gaussian `dim`-vectors with zero sample mean and sample
/// variance `Σ‖δ‖² / count` exactly equal to `variance`.
fn zero_sum_perturbation(
    rng: &mut ChaCha8Rng,
    count: usize,
    dim: usize,
    variance: f64,
) -> Result<Vec<C64>> {
    let mut v: Vec<C64> = (0..count * dim).map(|_| gauss(rng)).collect();
    if count == 0 || variance == 0.0 {
        v.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        return Ok(v);
    }
    for d in 0..dim {
        let mean = (0..count).map(|k| v[k * dim + d]).sum::<C64>() / count as f64;
        for k in 0..count {
            v[k * dim + d] -= mean;
        }
    }
    let sample_var = norm2(&v) / count as f64;
    if sample_var == 0.0 {
        return Err(Error::ImpossibleTarget(
            "perturbation collapsed to zero".into(),
        ));
    }
    let scale = (variance / sample_var).sqrt();
    v.iter_mut().for_each(|z| *z *= scale);
    Ok(v)
}

/// Requested sector averages and variances for [`EntangledState::random_with_moments`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTargets {
    pub var_g: f64,
    pub var_b: f64,
    pub g_avg: Vec<C64>,
    pub b_avg: Vec<C64>,
}

impl MomentTargets {
    /// `t (σ_G² + ‖Ḡ‖²) + (N − t)(σ_B² + ‖B̄‖²)`: the table mass before the
    /// global rescale. The rescale multiplies every moment by `N / mass`.
    pub fn raw_mass(&self, n: usize, t: usize) -> f64 {
        t as f64 * (self.var_g + norm2(&self.g_avg))
            + (n - t) as f64 * (self.var_b + norm2(&self.b_avg))
    }
}

/// The marked index set `G`, with `t = |G|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GoodSetRepr", try_from = "GoodSetRepr")]
pub struct GoodSet {
    n: usize,
    indices: Vec<usize>,
    mask: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct GoodSetRepr {
    n: usize,
    indices: Vec<usize>,
}

impl From<GoodSet> for GoodSetRepr {
    fn from(g: GoodSet) -> Self {
        GoodSetRepr {
            n: g.n,
            indices: g.indices,
        }
    }
}

impl TryFrom<GoodSetRepr> for GoodSet {
    type Error = Error;

    fn try_from(r: GoodSetRepr) -> Result<Self> {
        GoodSet::new(r.n, r.indices)
    }
}

impl GoodSet {
    /// Sorts the indices; rejects duplicates and out-of-range entries.
    pub fn new(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidGoodSet("duplicate index".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::InvalidGoodSet(format!(
                    "index {last} out of range for N = {n}"
                )));
            }
        }
        let mut mask = vec![false; n];
        indices.iter().for_each(|&g| mask[g] = true);
        Ok(GoodSet { n, indices, mask })
    }

    pub fn empty(n: usize) -> Self {
        GoodSet {
            n,
            indices: Vec::new(),
            mask: vec![false; n],
        }
    }

    /// `t` distinct indices drawn uniformly from `0..n`.
    pub fn random(n: usize, t: usize, seed: u64) -> Result<Self> {
        if t > n {
            return Err(Error::InvalidGoodSet(format!("t = {t} exceeds N = {n}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked = index::sample(&mut rng, n, t).into_vec();
        GoodSet::new(n, picked)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, a: usize) -> bool {
        self.mask.get(a).copied().unwrap_or(false)
    }

    pub fn bad_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(|&a| !self.mask[a])
    }

    /// `θ = arcsin √(t/N)`.
    pub fn theta(&self) -> f64 {
        (self.t() as f64 / self.n as f64).sqrt().asin()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.n != n || self.mask.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "good set is over {} indices, state has {n}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Average, its squared norm and the variance of one sector's rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorMoments {
    pub mean: Vec<C64>,
    pub mean_norm2: f64,
    pub variance: f64,
}

impl SectorMoments {
    fn of<'a>(rows: impl Iterator<Item = &'a [C64]> + Clone, count: usize, dim: usize) -> Self {
        let mut mean = vec![C64::new(0.0, 0.0); dim];
        for row in rows.clone() {
            mean.iter_mut().zip(row).for_each(|(m, z)| *m += z);
        }
        mean.iter_mut().for_each(|m| *m /= count as f64);
        let variance = rows
            .map(|row| {
                row.iter()
                    .zip(&mean)
                    .map(|(z, m)| (z - m).norm_sqr())
                    .sum::<f64>()
            })
            .sum::<f64>()
            / count as f64;
        SectorMoments {
            mean_norm2: norm2(&mean),
            mean,
            variance,
        }
    }
}

/// First and second moments of the good and bad sectors.
///
/// A sector with no rows (`t = 0` or `t = N`) is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub n: usize,
    pub t: usize,
    /// `θ ∈ [0, π/2]` with `sin²θ = t/N`.
    pub theta: f64,
    pub good: Option<SectorMoments>,
    pub bad: Option<SectorMoments>,
    /// `⟨Ḡ|B̄⟩`, when both sectors exist.
    pub cross: Option<C64>,
    /// `N₁ = Σ_g ‖f_g‖²`.
    pub n_good_mass: f64,
}

impl MomentSummary {
    pub fn sin2(&self) -> f64 {
        self.t as f64 / self.n as f64
    }

    pub fn cos2(&self) -> f64 {
        (self.n - self.t) as f64 / self.n as f64
    }

    pub fn g_avg(&self) -> Option<&[C64]> {
        self.good.as_ref().map(|s| s.mean.as_slice())
    }

    pub fn b_avg(&self) -> Option<&[C64]> {
        self.bad.as_ref().map(|s| s.mean.as_slice())
    }

    pub fn g_norm2(&self) -> f64 {
        self.good.as_ref().map_or(0.0, |s| s.mean_norm2)
    }

    pub fn b_norm2(&self) -> f64 {
        self.bad.as_ref().map_or(0.0, |s| s.mean_norm2)
    }

    pub fn var_g(&self) -> f64 {
        self.good.as_ref().map_or(0.0, |s| s.variance)
    }

    pub fn var_b(&self) -> f64 {
        self.bad.as_ref().map_or(0.0, |s| s.variance)
    }

    /// `sin²θ (σ_G² + ⟨Ḡ|Ḡ⟩) + cos²θ (σ_B² + ⟨B̄|B̄⟩)`, which equals one for
    /// any normalized state.
    pub fn normalization(&self) -> f64 {
        self.sin2() * (self.var_g() + self.g_norm2())
            + self.cos2() * (self.var_b() + self.b_norm2())
    }

    /// Both sectors, or a degenerate error when `t ∈ {0, N}`.
    pub fn sectors(&self) -> Result<(&SectorMoments, &SectorMoments)> {
        match (&self.good, &self.bad) {
            (Some(g), Some(b)) => Ok((g, b)),
            _ => Err(Error::Degenerate(format!(
                "t = {} of N = {} leaves a sector empty",
                self.t, self.n
            ))),
        }
    }
}

/// Sector averages `Ḡ⁰ = Σ_g f_g / t`, `B̄⁰ = Σ_b f_b / (N − t)` and variances.
pub fn moments(state: &EntangledState, good: &GoodSet) -> Result<MomentSummary> {
    let n = state.len();
    good.check_len(n)?;
    let t = good.t();
    let dim = state.data_dim();
    let good_rows = good.indices().iter().map(|&g| state.row(g));
    let bad_idx: Vec<usize> = good.bad_indices().collect();
    let bad_rows = bad_idx.iter().map(|&b| state.row(b));
    let good_m = (t > 0).then(|| SectorMoments::of(good_rows.clone(), t, dim));
    let bad_m = (t < n).then(|| SectorMoments::of(bad_rows, n - t, dim));
    let cross = match (&good_m, &bad_m) {
        (Some(g), Some(b)) => Some(inner(&g.mean, &b.mean)),
        _ => None,
    };
    Ok(MomentSummary {
        n,
        t,
        theta: good.theta(),
        good: good_m,
        bad: bad_m,
        cross,
        n_good_mass: good_rows.map(norm2).sum(),
    })
}

/// `⟨u|v⟩`, antilinear in the first argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}
