//! Exact application of the search operators to an [`EntangledState`].
//!
//! Every operator acts on the search index only and leaves the data register
//! untouched. All in-place passes are sequential, so results are bitwise
//! reproducible.
//!
//! # Panics
//!
//! Functions taking a [`GoodSet`] panic when its size differs from the state's `N`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::{EntangledState, GoodSet};

fn assert_compatible(state: &EntangledState, good: &GoodSet) {
    assert_eq!(
        good.n(),
        state.len(),
        "good set is over {} indices, state has {}",
        good.n(),
        state.len()
    );
}

/// `S_H = I − 2 Σ_g |g⟩⟨g|`: negates the good rows.
pub fn oracle_phase_flip_in_place(state: &mut EntangledState, good: &GoodSet) {
    assert_compatible(state, good);
    let dim = state.data_dim();
    let coeffs = state.coeffs_mut();
    for &g in good.indices() {
        coeffs[g * dim..(g + 1) * dim]
            .iter_mut()
            .for_each(|z| *z = -*z);
    }
}

/// `S_0 = I − 2|0⟩⟨0|`: negates row zero.
pub fn reflect_zero_in_place(state: &mut EntangledState) {
    let dim = state.data_dim();
    state.coeffs_mut()[..dim].iter_mut().for_each(|z| *z = -*z);
}

/// `W = H^{⊗n}` on the search register as `n` radix-2 butterfly passes.
pub fn walsh_hadamard_in_place(state: &mut EntangledState) {
    let n = state.len();
    let dim = state.data_dim();
    let coeffs = state.coeffs_mut();
    let mut half = 1;
    while half < n {
        for block in coeffs.chunks_mut(2 * half * dim) {
            let (lo, hi) = block.split_at_mut(half * dim);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = (a + b) * FRAC_1_SQRT_2;
                *y = (a - b) * FRAC_1_SQRT_2;
            }
        }
        half <<= 1;
    }
}

/// `G_H = −W S_0 W S_H`, global sign included.
pub fn grover_step_in_place(state: &mut EntangledState, good: &GoodSet) {
    oracle_phase_flip_in_place(state, good);
    walsh_hadamard_in_place(state);
    reflect_zero_in_place(state);
    walsh_hadamard_in_place(state);
    state.coeffs_mut().iter_mut().for_each(|z| *z = -*z);
}

pub fn oracle_phase_flip(state: &EntangledState, good: &GoodSet) -> EntangledState {
    let mut out = state.clone();
    oracle_phase_flip_in_place(&mut out, good);
    out
}

pub fn walsh_hadamard(state: &EntangledState) -> EntangledState {
    let mut out = state.clone();
    walsh_hadamard_in_place(&mut out);
    out
}

pub fn reflect_zero(state: &EntangledState) -> EntangledState {
    let mut out = state.clone();
    reflect_zero_in_place(&mut out);
    out
}

pub fn grover_step(state: &EntangledState, good: &GoodSet) -> EntangledState {
    let mut out = state.clone();
    grover_step_in_place(&mut out, good);
    out
}

/// `G_H^n |ψ⟩`; `n = 0` returns an exact copy.
pub fn grover_iterate(state: &EntangledState, good: &GoodSet, n: u64) -> EntangledState {
    let mut out = state.clone();
    for _ in 0..n {
        grover_step_in_place(&mut out, good);
    }
    out
}

/// The trajectory `ψ, G ψ, …, G^n ψ`.
pub fn trajectory(state: &EntangledState, good: &GoodSet, n: u64) -> Vec<EntangledState> {
    let mut cur = state.clone();
    let mut out = Vec::with_capacity(n as usize + 1);
    for _ in 0..n {
        let next = grover_step(&cur, good);
        out.push(std::mem::replace(&mut cur, next));
    }
    out.push(cur);
    out
}
