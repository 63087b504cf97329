use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;

use super::ValidationError;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn check_pair(a: &[f64], b: &[f64], min: usize) -> Result<(), ValidationError> {
    if a.len() != b.len() {
        return Err(ValidationError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < min {
        return Err(ValidationError::TooFewPoints { min, got: a.len() });
    }
    Ok(())
}

/// Sample Pearson correlation.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<f64, ValidationError> {
    check_pair(a, b, 2)?;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(ValidationError::ConstantInput);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Two-sided p-value of a Pearson correlation from the t statistic
/// `r√(n−2)/√(1−r²)` with `n − 2` degrees of freedom. `|r| = 1` gives 0.
pub fn pearson_p(r: f64, n: usize) -> Result<f64, ValidationError> {
    if n < 3 {
        return Err(ValidationError::TooFewPoints { min: 3, got: n });
    }
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t2 = r * r * df / (1.0 - r * r);
    // P(|T| > t) = I_{df/(df+t²)}(df/2, 1/2)
    Ok(beta_reg(df / 2.0, 0.5, df / (df + t2)).clamp(0.0, 1.0))
}

/// Ordinary least squares of `b` on `a`: `(slope, intercept)`.
pub fn linear_fit(a: &[f64], b: &[f64]) -> Result<(f64, f64), ValidationError> {
    check_pair(a, b, 2)?;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
    }
    if saa == 0.0 {
        return Err(ValidationError::ConstantInput);
    }
    let slope = sab / saa;
    Ok((slope, mb - slope * ma))
}

pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64, ValidationError> {
    check_pair(a, b, 1)?;
    Ok((a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt())
}

/// Agreement between laboratory values and model predictions.
///
/// Differences are `lab − pred`. Quantities that are undefined for the data
/// (correlation of a constant vector, a fit on constant lab values) are
/// `None` rather than a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementStats {
    /// Fit of predictions on lab values.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r: Option<f64>,
    pub rmse: f64,
    pub p: Option<f64>,
    pub n: usize,
    /// 1.96 × sample SD of the differences.
    pub rpc: f64,
    /// SD of the differences over the mean of the pair averages, in percent.
    pub cv_percent: Option<f64>,
    /// Mean difference.
    pub bias: f64,
    pub sd_diff: f64,
    /// `((lab + pred)/2, lab − pred)` per pair.
    pub ba_pairs: Vec<(f64, f64)>,
}

pub fn bland_altman(lab: &[f64], pred: &[f64]) -> Result<AgreementStats, ValidationError> {
    check_pair(lab, pred, 2)?;
    let n = lab.len();
    let ba_pairs: Vec<(f64, f64)> = lab
        .iter()
        .zip(pred)
        .map(|(a, b)| ((a + b) / 2.0, a - b))
        .collect();
    let diffs: Vec<f64> = ba_pairs.iter().map(|p| p.1).collect();
    let bias = mean(&diffs);
    let sd_diff = (diffs.iter().map(|d| (d - bias) * (d - bias)).sum::<f64>() / (n - 1) as f64).sqrt();
    let avg = mean(&ba_pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let cv_percent = (avg != 0.0).then(|| sd_diff / avg * 100.0);
    let r = pearson_r(lab, pred).ok();
    let p = r.and_then(|r| pearson_p(r, n).ok());
    let fit = linear_fit(lab, pred).ok();
    Ok(AgreementStats {
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        r,
        rmse: rmse(lab, pred)?,
        p,
        n,
        rpc: 1.96 * sd_diff,
        cv_percent,
        bias,
        sd_diff,
        ba_pairs,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum QqReference<'a> {
    /// Normal distribution with the sample's mean and SD.
    Normal,
    Sample(&'a [f64]),
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical quantile at probability `p`, interpolating between order
/// statistics placed at `(k − 0.5)/n`.
fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let pos = p * n as f64 - 0.5;
    if pos <= 0.0 {
        return sorted[0];
    }
    if pos >= (n - 1) as f64 {
        return sorted[n - 1];
    }
    let lo = pos.floor() as usize;
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[lo + 1] * w
}

/// Quantile pairs `(reference, sample)` for a QQ plot.
pub fn qq_points(sample: &[f64], reference: QqReference<'_>) -> Result<Vec<(f64, f64)>, ValidationError> {
    if sample.len() < 3 {
        return Err(ValidationError::TooFewPoints { min: 3, got: sample.len() });
    }
    let s = sorted(sample);
    let n = s.len();
    match reference {
        QqReference::Normal => {
            let m = mean(&s);
            let sd = (s.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
            let std_normal = Normal::standard();
            Ok(s
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let p = (i as f64 + 0.5) / n as f64;
                    (m + sd * std_normal.inverse_cdf(p), *v)
                })
                .collect())
        }
        QqReference::Sample(other) => {
            if other.len() < 3 {
                return Err(ValidationError::TooFewPoints { min: 3, got: other.len() });
            }
            let r = sorted(other);
            if r.len() == n {
                return Ok(r.into_iter().zip(s).collect());
            }
            let (small, large, sample_is_small) = if n < r.len() { (&s, &r, true) } else { (&r, &s, false) };
            let m = small.len();
            Ok(small
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let q = empirical_quantile(large, (i as f64 + 0.5) / m as f64);
                    if sample_is_small {
                        (q, *v)
                    } else {
                        (*v, q)
                    }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over the data range; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            lo: lo + k as f64 * width,
            hi: if k + 1 == bins { hi } else { lo + (k + 1) as f64 * width },
            count,
        })
        .collect()
}
