//! Scenario configuration files.
//!
//! A scenario is a JSON object; see the README for the full schema. Unknown
//! fields are rejected so typos surface as errors instead of silently
//! falling back to defaults.

use std::path::{Path, PathBuf};

use entsearch_core::qstate::MAX_QUBITS;
use entsearch_core::{AmplitudeBudget, EntangledState, GoodSet, MomentTargets, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Find,
    Count,
    Verify,
    Sweep,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Find => "find",
            Kind::Count => "count",
            Kind::Verify => "verify",
            Kind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_version")]
    pub version: u32,
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<GoodSpec>,
    /// Last Grover iteration tabulated by `find` and `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u64>,
    /// Ancilla register size for `count` (and `sweep` when the grid has no `p`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputFormat,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<SweepGrid>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

fn default_repetitions() -> usize {
    101
}

/// Initial state. `"flat"` and `"one_to_one"` are bare strings, the others
/// single-key objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpec {
    Flat,
    OneToOne,
    Random(RandomState),
    File(PathBuf),
}

/// Seeded random state. Without averages the moments are drawn at random too;
/// with averages the variances default to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomState {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_avg: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_avg: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoodSpec {
    Indices(Vec<usize>),
    Random(RandomGood),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGood {
    pub t: usize,
    pub seed: u64,
}

/// Tolerances used by every comparison in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Row amplitudes and conserved variances.
    pub amplitude: f64,
    /// Probabilities: `P(n)`, window masses, ancilla distributions.
    pub probability: f64,
    /// Norm drift of simulated states.
    pub unitarity: f64,
    /// The textbook `sin²((2n+1)θ)` law on flat states.
    pub reduction: f64,
    /// `P_MAX` against `1 − σ_B² cos²θ`.
    pub p_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            amplitude: 1e-9,
            probability: 1e-9,
            unitarity: 1e-12,
            reduction: 1e-12,
            p_max: 1e-6,
        }
    }
}

/// Sizes of the verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    /// Number of random states in the dynamics corpus.
    pub corpus_size: usize,
    /// Last iteration compared against the closed form.
    pub max_iterations: u64,
    /// Random `f` values per window case.
    pub sigma_samples: usize,
    /// Random states in the sufficient-averages check.
    pub averages_states: usize,
    /// Repeated runs in the determinism check.
    pub determinism_runs: usize,
    /// Worker counts compared in the determinism check.
    pub determinism_workers: Vec<usize>,
    /// Criteria to run; empty means all.
    pub criteria: Vec<u8>,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            corpus_size: 100,
            max_iterations: 50,
            sigma_samples: 1000,
            averages_states: 50,
            determinism_runs: 3,
            determinism_workers: vec![1, 4],
            criteria: Vec::new(),
        }
    }
}

/// Parameter grid for `sweep`. Every combination is one cell; an empty list
/// anywhere gives an empty sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    /// Search-space sizes `N` (powers of two).
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_dim: Option<Vec<usize>>,
    #[serde(default)]
    pub t: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub state: SweepState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepState {
    Flat,
    #[default]
    Random,
}

/// Parses a scenario, reporting the field path and position of any error.
pub fn parse(text: &str, origin: &str) -> Result<Scenario, CliError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path == "?" {
            String::new()
        } else {
            format!(" at `{path}`")
        };
        CliError::Config(format!(
            "{}{field}: {}",
            position(origin, &inner),
            message(&inner)
        ))
    })?;
    de.end()
        .map_err(|e| CliError::Config(format!("{}: {}", position(origin, &e), message(&e))))?;
    if scenario.version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "{origin}: unsupported schema version {} (expected {SCHEMA_VERSION})",
            scenario.version
        )));
    }
    Ok(scenario)
}

fn position(origin: &str, e: &serde_json::Error) -> String {
    format!("{origin}:{}:{}", e.line(), e.column())
}

/// The error text without serde_json's trailing position.
fn message(e: &serde_json::Error) -> String {
    let text = e.to_string();
    match text.rsplit_once(" at line ") {
        Some((head, _)) => head.to_string(),
        None => text,
    }
}

/// Reads and parses a scenario file.
pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn to_c64(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

impl Scenario {
    /// Builds the initial state and good set. Relative state-file paths are
    /// resolved against `base`.
    pub fn build_problem(
        &self,
        base: &Path,
        budget: AmplitudeBudget,
    ) -> Result<(EntangledState, GoodSet), CliError> {
        let spec = self
            .state
            .as_ref()
            .ok_or_else(|| config_err(format!("`state` is required for {}", self.kind.as_str())))?;
        let state = match spec {
            StateSpec::File(path) => {
                let full = base.join(path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| config_err(format!("{}: {e}", full.display())))?;
                let mut de = serde_json::Deserializer::from_str(&text);
                let state: EntangledState =
                    serde_path_to_error::deserialize(&mut de).map_err(|e| {
                        config_err(format!(
                            "{}: at `{}`: {}",
                            full.display(),
                            e.path(),
                            e.inner()
                        ))
                    })?;
                if self.n_qubits.is_some_and(|q| q != state.n_qubits()) {
                    return Err(config_err(format!(
                        "state file has n_qubits = {}, scenario says {}",
                        state.n_qubits(),
                        self.n_qubits.unwrap_or_default()
                    )));
                }
                if self.data_dim.is_some_and(|d| d != state.data_dim()) {
                    return Err(config_err(format!(
                        "state file has data_dim = {}, scenario says {}",
                        state.data_dim(),
                        self.data_dim.unwrap_or_default()
                    )));
                }
                state
            }
            _ => {
                let n_qubits = self
                    .n_qubits
                    .ok_or_else(|| config_err("`n_qubits` is required"))?;
                if n_qubits == 0 || n_qubits > MAX_QUBITS {
                    return Err(config_err(format!(
                        "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
                    )));
                }
                let n = 1usize << n_qubits;
                let dim = match spec {
                    StateSpec::OneToOne => n,
                    _ => self.data_dim.unwrap_or(1),
                };
                budget
                    .check(n.saturating_mul(dim))
                    .map_err(|e| config_err(format!("state: {e}")))?;
                let good = self.build_good(n)?;
                let state = self.generate_state(spec, n_qubits, &good)?;
                return Ok((state, good));
            }
        };
        let good = self.build_good(state.len())?;
        Ok((state, good))
    }

    fn build_good(&self, n: usize) -> Result<GoodSet, CliError> {
        let spec = self
            .good
            .as_ref()
            .ok_or_else(|| config_err("`good` is required"))?;
        let good = match spec {
            GoodSpec::Indices(ix) => GoodSet::new(n, ix.clone()),
            GoodSpec::Random(r) => GoodSet::random(n, r.t, r.seed),
        };
        good.map_err(|e| config_err(format!("good: {e}")))
    }

    fn generate_state(
        &self,
        spec: &StateSpec,
        n_qubits: u32,
        good: &GoodSet,
    ) -> Result<EntangledState, CliError> {
        let data_dim = self.data_dim.unwrap_or(1);
        let state = match spec {
            StateSpec::Flat => EntangledState::new_flat(n_qubits, data_dim),
            StateSpec::OneToOne => {
                let n = 1usize << n_qubits;
                if self.data_dim.is_some_and(|d| d != n) {
                    return Err(config_err(format!("one_to_one needs data_dim = N = {n}")));
                }
                EntangledState::one_to_one(n_qubits)
            }
            StateSpec::Random(r) => match (&r.g_avg, &r.b_avg) {
                (None, None) if r.var_g.is_none() && r.var_b.is_none() => {
                    EntangledState::random(n_qubits, data_dim, good, r.seed)
                }
                (Some(g), Some(b)) => {
                    if g.len() != data_dim || b.len() != data_dim {
                        return Err(config_err(format!(
                            "state.random: averages must have data_dim = {data_dim} entries"
                        )));
                    }
                    let targets = MomentTargets {
                        var_g: r.var_g.unwrap_or(0.0),
                        var_b: r.var_b.unwrap_or(0.0),
                        g_avg: to_c64(g),
                        b_avg: to_c64(b),
                    };
                    EntangledState::random_with_moments(n_qubits, good, &targets, r.seed)
                }
                _ => {
                    return Err(config_err(
                        "state.random: give both g_avg and b_avg, or no moment targets at all",
                    ))
                }
            },
            StateSpec::File(_) => unreachable!("handled by build_problem"),
        };
        state.map_err(|e| config_err(format!("state: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_find() {
        let s = parse(
            r#"{"kind": "find", "n_qubits": 2, "state": "flat", "good": {"indices": [0]}}"#,
            "x",
        )
        .unwrap();
        assert_eq!(s.kind, Kind::Find);
        assert_eq!(s.tolerances, Tolerances::default());
        assert_eq!(s.repetitions, 101);
        let (state, good) = s
            .build_problem(Path::new("."), AmplitudeBudget::default())
            .unwrap();
        assert_eq!(state.len(), 4);
        assert_eq!(good.indices(), &[0]);
    }

    #[test]
    fn error_names_field_and_line() {
        let text = "{\n  \"kind\": \"find\",\n  \"state\": {\"random\": {\"seed\": \"x\"}}\n}";
        let msg = parse(text, "cfg.json").unwrap_err().to_string();
        assert!(msg.contains("cfg.json:3:"), "{msg}");
        assert!(msg.contains("state.random.seed"), "{msg}");
    }

    #[test]
    fn rejects_unknown_fields_and_versions() {
        assert!(parse(r#"{"kind": "find", "bogus": 1}"#, "x").is_err());
        assert!(parse(r#"{"kind": "find", "version": 2}"#, "x").is_err());
        assert!(parse(r#"{"kind": "find"} trailing"#, "x").is_err());
    }

    #[test]
    fn random_targets() {
        let s = parse(
            r#"{"kind": "find", "n_qubits": 3, "data_dim": 2,
                "state": {"random": {"seed": 4, "var_b": 0.1, "g_avg": [[1,0],[0,0]], "b_avg": [[0.5,0],[0,0.5]]}},
                "good": {"random": {"t": 2, "seed": 1}}}"#,
            "x",
        )
        .unwrap();
        let (state, good) = s
            .build_problem(Path::new("."), AmplitudeBudget::default())
            .unwrap();
        assert_eq!(good.t(), 2);
        assert!((state.total_mass() - 8.0).abs() < 1e-9);

        let half = parse(
            r#"{"kind": "find", "n_qubits": 3, "state": {"random": {"seed": 4, "g_avg": [[1,0]]}}, "good": {"indices": [1]}}"#,
            "x",
        )
        .unwrap();
        assert!(half
            .build_problem(Path::new("."), AmplitudeBudget::default())
            .is_err());
    }
}
