//! Reference computations built independently of the library code.
#![allow(dead_code)]

use num_complex::Complex64;

/// Daubechies scaling filter with `p` vanishing moments (`2p` taps), built
/// by spectral factorization: the roots of
/// `P(y) = sum_{k<p} C(p-1+k, k) y^k` are mapped through
/// `z + 1/z = 2 - 4y`, the roots inside the unit circle are kept, and the
/// resulting polynomial times `(z + 1)^p` is scaled to sum to `sqrt 2`.
/// Taps come out with the largest power of `z` first.
pub fn daubechies_scaling(p: usize) -> Vec<f64> {
    let coeffs: Vec<f64> = (0..p).map(|k| binomial(p - 1 + k, k)).collect();
    let y_roots = poly_roots(&coeffs);

    // Monic polynomial coefficients, highest power first.
    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for y in y_roots {
        let b = Complex64::new(2.0, 0.0) - 4.0 * y;
        let disc = (b * b - 4.0).sqrt();
        let r1 = (b + disc) / 2.0;
        let r2 = (b - disc) / 2.0;
        let inside = if r1.norm() < 1.0 { r1 } else { r2 };
        poly = mul_linear(&poly, inside);
    }
    for _ in 0..p {
        poly = mul_linear(&poly, Complex64::new(-1.0, 0.0));
    }
    let taps: Vec<f64> = poly.iter().map(|c| c.re).collect();
    let sum: f64 = taps.iter().sum();
    taps.iter()
        .map(|t| t * std::f64::consts::SQRT_2 / sum)
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `poly * (z - root)`, highest power first.
fn mul_linear(poly: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i] += c;
        out[i + 1] -= c * root;
    }
    out
}

/// Roots of `sum_k c[k] y^k` by Durand-Kerner iteration.
fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let eval = |y: Complex64| {
        c.iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * y + ck / lead)
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32)).collect();
    for _ in 0..500 {
        let prev = roots.clone();
        for i in 0..deg {
            let denom = (0..deg)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| {
                    acc * (roots[i] - roots[j])
                });
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
        }
        let moved = roots
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if moved < 1e-16 {
            break;
        }
    }
    roots
}

/// Dense periodized analysis matrix: rows `0..n/2` produce the
/// approximation, rows `n/2..n` the detail.
pub fn analysis_matrix(h: &[f64], n: usize) -> Vec<Vec<f64>> {
    let len = h.len();
    let g: Vec<f64> = (0..len)
        .map(|k| {
            if k % 2 == 0 {
                h[len - 1 - k]
            } else {
                -h[len - 1 - k]
            }
        })
        .collect();
    let mut m = vec![vec![0.0; n]; n];
    for k in 0..n / 2 {
        for i in 0..len {
            m[k][(2 * k + i) % n] += h[i];
            m[n / 2 + k][(2 * k + i) % n] += g[i];
        }
    }
    m
}

pub fn mat_vec(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Per-class precision, recall and FPR of a `[pred][target]` count table,
/// straight from the one-vs-rest definitions.
pub fn one_vs_rest(counts: &[[u64; 4]; 4], class: usize) -> (f64, f64, f64) {
    let total: u64 = counts.iter().flatten().sum();
    let tp = counts[class][class];
    let predicted: u64 = counts[class].iter().sum();
    let actual: u64 = counts.iter().map(|row| row[class]).sum();
    let fp = predicted - tp;
    let fnn = actual - tp;
    let tn = total - tp - fp - fnn;
    (
        tp as f64 / predicted as f64,
        tp as f64 / actual as f64,
        fp as f64 / (fp + tn) as f64,
    )
}
