//! Fixtures shared by the benchmarks.

use entsearch_core::{EntangledState, GoodSet};

/// A seeded random problem with `t` good items out of `2^n_qubits`.
pub fn problem(n_qubits: u32, data_dim: usize, t: usize, seed: u64) -> (EntangledState, GoodSet) {
    let good = GoodSet::random(1 << n_qubits, t, seed).expect("valid good set");
    let state =
        EntangledState::random(n_qubits, data_dim, &good, seed ^ 0x5eed).expect("valid state");
    (state, good)
}
