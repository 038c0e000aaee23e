//! Radix-2 quantum Fourier transform, `F|a⟩ = (1/√P) Σ_c e^{2πi ac/P} |c⟩`.

use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Transforms `buf`, viewed as `p` consecutive blocks of `lane` amplitudes,
/// along the block index. Every lane position is an independent length-`p`
/// transform, so a whole `(m, a, d)` tensor is handled slab by slab.
pub(crate) fn transform_blocks(
    buf: &mut [C64],
    p: usize,
    lane: usize,
    inverse: bool,
) -> Result<()> {
    if p == 0 || !p.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(p));
    }
    if buf.len() != p * lane {
        return Err(Error::DimensionMismatch(format!(
            "buffer of {} does not hold {p} blocks of {lane}",
            buf.len()
        )));
    }
    let bits = p.trailing_zeros();
    if bits > 0 {
        for i in 0..p {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                for k in 0..lane {
                    buf.swap(i * lane + k, j * lane + k);
                }
            }
        }
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let twiddles: Vec<C64> = (0..p / 2)
        .map(|k| C64::from_polar(1.0, sign * 2.0 * PI * k as f64 / p as f64))
        .collect();
    let mut len = 2;
    while len <= p {
        let half = len / 2;
        let stride = p / len;
        for block in buf.chunks_mut(len * lane) {
            let (lo, hi) = block.split_at_mut(half * lane);
            for k in 0..half {
                let w = twiddles[k * stride];
                let lo = &mut lo[k * lane..(k + 1) * lane];
                let hi = &mut hi[k * lane..(k + 1) * lane];
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let a = *x;
                    let b = *y * w;
                    *x = a + b;
                    *y = a - b;
                }
            }
        }
        len <<= 1;
    }
    let scale = (p as f64).sqrt().recip();
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(())
}

pub fn qft_in_place(v: &mut [C64]) -> Result<()> {
    transform_blocks(v, v.len(), 1, false)
}

pub fn inverse_qft_in_place(v: &mut [C64]) -> Result<()> {
    transform_blocks(v, v.len(), 1, true)
}

pub fn qft(v: &[C64]) -> Result<Vec<C64>> {
    let mut out = v.to_vec();
    qft_in_place(&mut out)?;
    Ok(out)
}

pub fn inverse_qft(v: &[C64]) -> Result<Vec<C64>> {
    let mut out = v.to_vec();
    inverse_qft_in_place(&mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn basis_zero_goes_uniform() {
        let out = qft(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        for z in out {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn uniform_goes_to_basis_zero() {
        let out = qft(&[c(0.5); 4]).unwrap();
        assert!((out[0] - c(1.0)).norm() < 1e-15);
        assert!(out[1..].iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn sign_convention() {
        // F|1⟩ on P = 4 is (1, i, −1, −i)/2.
        let out = qft(&[c(0.0), c(1.0), c(0.0), c(0.0)]).unwrap();
        let want = [c(0.5), C64::new(0.0, 0.5), c(-0.5), C64::new(0.0, -0.5)];
        for (z, w) in out.iter().zip(want) {
            assert!((z - w).norm() < 1e-15);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert_eq!(qft(&[c(1.0); 3]), Err(Error::NotPowerOfTwo(3)));
        assert_eq!(qft(&[]), Err(Error::NotPowerOfTwo(0)));
    }

    #[test]
    fn length_one_is_identity() {
        assert_eq!(
            qft(&[C64::new(0.3, 0.4)]).unwrap(),
            vec![C64::new(0.3, 0.4)]
        );
    }
}
