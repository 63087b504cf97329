//! Brute-force reference implementations used by the integration tests.
//! They are written independently of the library code: explicit loops,
//! dense decompositions from nalgebra, a naive DFT, quadrature.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Relative error with the denominator floored at 1, for quantities that
/// can legitimately sit at or near zero.
pub fn rel_err_floor(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

pub fn sum_sq(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v * v;
    }
    s
}

pub fn diff(x: &[f64]) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 1..x.len() {
        d.push(x[i] - x[i - 1]);
    }
    d
}

/// (activity, mobility, complexity) from explicit difference sequences.
pub fn hjorth_oracle(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let d1 = diff(x);
    let d2 = diff(&d1);
    let m0 = sum_sq(x);
    let m2 = sum_sq(&d1) / n;
    let m4 = sum_sq(&d2) / n;
    let mob = if m0 > 0.0 { (m2 / m0).sqrt() } else { 0.0 };
    let comp = if m2 > 0.0 && mob > 0.0 { (m4 / m2).sqrt() / mob } else { 0.0 };
    (m0, mob, comp)
}

/// Σ|X_k|² / N for the naive DFT X of `x`, equal to Σx² by Parseval.
pub fn dft_energy(x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for k in 0..n {
        let (mut re, mut im) = (0.0, 0.0);
        for (j, v) in x.iter().enumerate() {
            let angle = -2.0 * PI * (k * j % n) as f64 / n as f64;
            re += v * angle.cos();
            im += v * angle.sin();
        }
        total += re * re + im * im;
    }
    total / n as f64
}

/// Hjorth triple with every moment taken in the frequency domain.
pub fn hjorth_spectral(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let d1 = diff(x);
    let d2 = diff(&d1);
    let m0 = dft_energy(x);
    let m2 = dft_energy(&d1) / n;
    let m4 = dft_energy(&d2) / n;
    let mob = (m2 / m0).sqrt();
    (m0, mob, (m4 / m2).sqrt() / mob)
}

pub fn waveform_length_oracle(x: &[f64]) -> f64 {
    diff(x).iter().map(|v| v.abs()).sum()
}

pub fn crest_oracle(x: &[f64]) -> f64 {
    let peak = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    peak / (sum_sq(x) / x.len() as f64).sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Shift making the signal strictly positive: none when it already is,
/// else −min plus 1e-9 of the range.
pub fn shift_oracle(x: &[f64]) -> f64 {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo > 0.0 {
        0.0
    } else if hi > lo {
        -lo + 1e-9 * (hi - lo)
    } else {
        -lo + 1e-9 * lo.abs().max(1.0)
    }
}

/// Geometric mean as the N-th root of the product, accumulated in chunks
/// to stay in range.
pub fn geomean_oracle(x: &[f64]) -> f64 {
    let s = shift_oracle(x);
    let n = x.len() as f64;
    let mut acc = 1.0;
    let mut exp2 = 0i64;
    for v in x {
        acc *= v + s;
        // keep the running product near 1
        let (m, e) = frexp(acc);
        acc = m;
        exp2 += e as i64;
    }
    acc.powf(1.0 / n) * 2f64.powf(exp2 as f64 / n) - s
}

fn frexp(v: f64) -> (f64, i32) {
    if v == 0.0 {
        return (0.0, 0);
    }
    let e = v.abs().log2().floor() as i32;
    (v / 2f64.powi(e), e)
}

/// Flatness: geometric over arithmetic mean of the shifted signal.
pub fn flatness_oracle(x: &[f64]) -> f64 {
    let s = shift_oracle(x);
    let shifted: Vec<f64> = x.iter().map(|v| v + s).collect();
    if shifted.iter().all(|v| *v == shifted[0]) {
        return 1.0;
    }
    (geomean_oracle(&shifted) / mean(&shifted)).min(1.0)
}

pub fn median_oracle(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// (std with n − 1, skewness, kurtosis) by two-pass summation.
pub fn moments_oracle(x: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let m = mean(x);
    let c2: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    let c3: f64 = x.iter().map(|v| (v - m).powi(3)).sum();
    let c4: f64 = x.iter().map(|v| (v - m).powi(4)).sum();
    let sd = (c2 / (n - 1.0)).sqrt();
    let pop = c2 / n;
    if pop == 0.0 {
        return (sd, 0.0, 0.0);
    }
    (sd, (c3 / n) / pop.powf(1.5), (c4 / n) / (pop * pop))
}

/// Entropy of normalized singular values of the delay-embedding matrix,
/// via nalgebra's dense SVD.
pub fn svd_entropy_oracle(x: &[f64], m: usize) -> f64 {
    let rows = x.len() - m + 1;
    let a = DMatrix::from_fn(rows, m, |r, c| x[r + c]);
    let sv = a.svd(false, false).singular_values;
    let total: f64 = sv.iter().sum();
    let mut h = 0.0;
    for s in sv.iter() {
        let p = s / total;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    h.max(0.0)
}

/// The seven pressure-ratio indicators from explicit loops.
pub fn pr_oracle(rot: &[f64], feed: &[f64], fob: &[f64]) -> [f64; 7] {
    let eps = 1e-12;
    let pr: Vec<f64> = (0..rot.len()).map(|i| rot[i] / feed[i].max(eps)).collect();
    let d1 = diff(&pr);
    let d2 = diff(&d1);
    let sad: f64 = d1.iter().map(|v| v.abs()).sum();
    let spr2 = sum_sq(&pr);
    let sdpr2 = sum_sq(&d1);
    let sddpr2 = sum_sq(&d2);
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    let max_pr = pr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_fob = fob.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    [
        sad,
        (spr2 + eps).ln(),
        sdpr2,
        sddpr2,
        (ratio(sdpr2, spr2) + eps).ln(),
        (ratio(sddpr2, sdpr2) + eps).ln(),
        max_pr * max_fob,
    ]
}

/// Student-t density with `df` degrees of freedom.
pub fn t_density(t: f64, df: f64) -> f64 {
    let c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * PI).ln();
    (c - (df + 1.0) / 2.0 * (1.0 + t * t / df).ln()).exp()
}

/// Two-sided p-value of a Pearson r by composite Simpson integration of
/// the t density over [0, |t|].
pub fn pearson_p_quadrature(r: f64, n: usize) -> f64 {
    let df = (n - 2) as f64;
    let t = (r * (df / (1.0 - r * r)).sqrt()).abs();
    let steps = 200_000;
    let h = t / steps as f64;
    let mut s = t_density(0.0, df) + t_density(t, df);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * t_density(i as f64 * h, df);
    }
    1.0 - 2.0 * s * h / 3.0
}
