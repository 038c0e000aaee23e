//! Grover search and quantum counting starting from an entangled search register.
//!
//! A state `(1/√N) Σ_a |a⟩|f_a⟩` couples an `n`-qubit search register to a
//! `D`-dimensional data register. It is stored as the `N × D` table of
//! un-normalized data vectors `f_a`, with `Σ_a ‖f_a‖² = N`.
//!
//! * [`qstate`] builds states and extracts the sector moments (averages,
//!   variances, Grover angle) that drive every closed form.
//! * [`grover`] applies the operators `S_H`, `W`, `S_0` and
//!   `G_H = −W S_0 W S_H` exactly. It is the reference every prediction is
//!   checked against.
//! * [`analytic`] holds the closed-form n-step rows, the `(X_n, Y_n)`
//!   recurrence, the success probability law `P(n)` and the optimal times.
//! * [`counting`] simulates the counting circuit (controlled Grover powers
//!   followed by a QFT on an ancilla register) and predicts its peak windows.
//!
//! # Probability normalization
//!
//! `P(n)` is the physical probability `(1/N) Σ_g ‖f_g⁽ⁿ⁾‖²`. With that
//! convention the oscillation law reads
//!
//! ```text
//! P(n)  = P_AV − ΔP · cos 2(2nθ − φ_R) · e^{−2φ_I}
//! ΔP    = ½ cos²θ (⟨B̄|B̄⟩ + tan²θ ⟨Ḡ|Ḡ⟩)
//! P_AV  = 1 − ΔP − σ_B² cos²θ
//! ```
//!
//! Forms of this law that scale `ΔP` by `N` and use `N σ_B²` only hold for a
//! table normalized to `Σ_a ‖f_a‖² = 1`; applied to the `Σ = N` table they
//! give probabilities outside `[0, 1]` already for the flat state.

pub mod analytic;
pub mod counting;
pub mod error;
pub mod grover;
pub mod limits;
pub mod qstate;

pub use num_complex::Complex64 as C64;

pub use analytic::OscillationParams;
pub use counting::{CountEstimate, CountReport, CountState, WindowCase, WindowPrediction};
pub use error::{Error, Result};
pub use limits::AmplitudeBudget;
pub use qstate::{EntangledState, GoodSet, MomentSummary, MomentTargets, SectorMoments};
