//! One-level periodized Daubechies-4 transform (8 taps, four vanishing
//! moments).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param_err, Result};

/// Scaling (low-pass) filter of the db4 wavelet.
pub const DB4_SCALING: [f64; 8] = [
    0.230_377_813_308_896_5,
    0.714_846_570_552_915_6,
    0.630_880_767_929_858_9,
    -0.027_983_769_416_859_854,
    -0.187_034_811_719_093_08,
    0.030_841_381_835_560_764,
    0.032_883_011_666_885_2,
    -0.010_597_401_785_069_032,
];

/// Wavelet (high-pass) filter, `g[n] = (-1)^n h[7 - n]`.
pub const DB4_WAVELET: [f64; 8] = wavelet_taps();

/// The wavelet filter factored as `(1 - z^-1) * q(z)`: running sums of
/// `g`. Applying `q` to first differences annihilates constants exactly.
const DB4_WAVELET_DIFF: [f64; 7] = difference_taps();

const fn wavelet_taps() -> [f64; 8] {
    let mut g = [0.0; 8];
    let mut n = 0;
    while n < 8 {
        let h = DB4_SCALING[7 - n];
        g[n] = if n % 2 == 0 { h } else { -h };
        n += 1;
    }
    g
}

const fn difference_taps() -> [f64; 7] {
    let mut q = [0.0; 7];
    let mut acc = 0.0;
    let mut n = 0;
    while n < 7 {
        acc += DB4_WAVELET[n];
        q[n] = acc;
        n += 1;
    }
    q
}

/// Forward transform of an even-length signal (N >= 8). Returns
/// `(approximation, detail)`, each of length N/2:
///
/// `a[k] = sum_n h[n] x[(2k + n) mod N]`, `d[k] = sum_n g[n] x[(2k + n) mod N]`.
pub fn dwt_db4_level1(x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    if n < 8 || !n.is_multiple_of(2) {
        return Err(param_err!("db4 transform needs an even length >= 8, got {n}"));
    }
    let half = n / 2;
    let mut approx = vec![0.0; half];
    let mut detail = vec![0.0; half];
    for k in 0..half {
        let base = 2 * k;
        let mut a = 0.0;
        for (i, &h) in DB4_SCALING.iter().enumerate() {
            a += h * x[(base + i) % n];
        }
        // d[k] = sum_i q[i] (x[base+i] - x[base+i+1]) since g = (1 - z^-1) q.
        let mut d = 0.0;
        for (i, &q) in DB4_WAVELET_DIFF.iter().enumerate() {
            d += q * (x[(base + i) % n] - x[(base + i + 1) % n]);
        }
        approx[k] = a;
        detail[k] = d;
    }
    Ok((approx, detail))
}

/// Inverse of [`dwt_db4_level1`].
pub fn idwt_db4_level1(approx: &[f64], detail: &[f64]) -> Result<Vec<f64>> {
    if approx.len() != detail.len() {
        return Err(param_err!(
            "approximation ({}) and detail ({}) lengths differ",
            approx.len(),
            detail.len()
        ));
    }
    let n = 2 * approx.len();
    if n < 8 {
        return Err(param_err!("db4 inverse needs at least 4 coefficients per band"));
    }
    let mut x = vec![0.0; n];
    for (k, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        for i in 0..8 {
            x[(2 * k + i) % n] += DB4_SCALING[i] * a + DB4_WAVELET[i] * d;
        }
    }
    Ok(x)
}
