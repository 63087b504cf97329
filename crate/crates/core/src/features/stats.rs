use serde::{Deserialize, Serialize};

use super::{positivity_shift, require_len, FeatureError, PositivityPolicy};

/// Signal maximum, standard deviation, skewness, kurtosis, mean, geometric
/// mean and median, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub max: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub mean: f64,
    pub geometric_mean: f64,
    pub median: f64,
}

impl DescriptiveStats {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.max,
            self.std_dev,
            self.skewness,
            self.kurtosis,
            self.mean,
            self.geometric_mean,
            self.median,
        ]
    }
}

pub fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Geometric mean. Under [`PositivityPolicy::Offset`] a non-positive signal
/// is shifted up before the log-mean and shifted back afterwards, so the
/// result stays in signal units.
pub fn geometric_mean(x: &[f64], policy: PositivityPolicy) -> Result<f64, FeatureError> {
    require_len(x, 1)?;
    let shift = match policy {
        PositivityPolicy::Offset => positivity_shift(x),
        PositivityPolicy::Reject => 0.0,
    };
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| **v + shift <= 0.0) {
        return Err(FeatureError::NonPositiveSample { index, value });
    }
    let log_mean = x.iter().map(|v| (v + shift).ln()).sum::<f64>() / x.len() as f64;
    Ok(log_mean.exp() - shift)
}

/// The seven descriptive statistics. Standard deviation uses the `n - 1`
/// divisor; skewness and kurtosis are the standardized third and fourth
/// central moments (kurtosis not excess-adjusted), 0 for a constant signal.
pub fn descriptive_stats(
    x: &[f64],
    policy: PositivityPolicy,
) -> Result<DescriptiveStats, FeatureError> {
    require_len(x, 2)?;
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let std_dev = (m2 / (n - 1.0)).sqrt();
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);
    let (skewness, kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2))
    } else {
        (0.0, 0.0)
    };
    Ok(DescriptiveStats {
        max: x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        std_dev,
        skewness,
        kurtosis,
        mean,
        geometric_mean: geometric_mean(x, policy)?,
        median: median(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_table() {
        let s = descriptive_stats(&[1.0, 2.0, 3.0, 4.0], PositivityPolicy::Reject).unwrap();
        assert_eq!(s.max, 4.0);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert!((s.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.geometric_mean - 24f64.powf(0.25)).abs() < 1e-12);
        // central moments 1.25 and 2.5625 -> 1.64
        assert!((s.kurtosis - 1.64).abs() < 1e-12);
    }

    #[test]
    fn symmetric_signal_has_no_skew() {
        let s = descriptive_stats(&[1.0, 3.0, 7.0, 11.0, 13.0], PositivityPolicy::Reject)
            .unwrap();
        assert!(s.skewness.abs() < 1e-12);
        assert_eq!(s.median, 7.0);
    }

    #[test]
    fn geometric_mean_rejects_zero_without_offset() {
        assert!(descriptive_stats(&[0.0, 1.0], PositivityPolicy::Reject).is_err());
        let g = geometric_mean(&[0.0, 1.0], PositivityPolicy::Offset).unwrap();
        assert!(g.is_finite() && g < 0.5);
    }

    #[test]
    fn constant_signal_moments() {
        let s = descriptive_stats(&[3.0; 5], PositivityPolicy::Reject).unwrap();
        assert_eq!((s.std_dev, s.skewness, s.kurtosis), (0.0, 0.0, 0.0));
        assert!((s.geometric_mean - 3.0).abs() < 1e-14);
    }
}
