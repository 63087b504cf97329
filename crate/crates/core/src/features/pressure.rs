use serde::{Deserialize, Serialize};

use super::{require_len, FeatureError, LOG_EPS};

/// The seven pressure-ratio indicators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrIndicators {
    /// Sum of absolute consecutive differences of PR.
    pub sad: f64,
    /// `ln(SPR2 + eps)` where SPR2 is the sum of PR squared.
    pub log_spr2: f64,
    /// Sum of squared first differences of PR.
    pub sdpr2: f64,
    /// Sum of squared second differences of PR.
    pub sddpr2: f64,
    /// `ln(SDPR2 / SPR2 + eps)`.
    pub log_ratio1: f64,
    /// `ln(SDDPR2 / SDPR2 + eps)`.
    pub log_ratio2: f64,
    /// `max(PR) * max(fob)`.
    pub maxpr_maxfob: f64,
}

impl PrIndicators {
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.sad,
            self.log_spr2,
            self.sdpr2,
            self.sddpr2,
            self.log_ratio1,
            self.log_ratio2,
            self.maxpr_maxfob,
        ]
    }
}

/// Rotation pressure over feed pressure, with feed pressure floored at
/// `LOG_EPS`.
pub fn pressure_ratio(
    rotation_pressure: &[f64],
    feed_pressure: &[f64],
) -> Result<Vec<f64>, FeatureError> {
    if rotation_pressure.len() != feed_pressure.len() {
        return Err(FeatureError::LengthMismatch);
    }
    Ok(rotation_pressure
        .iter()
        .zip(feed_pressure)
        .map(|(r, f)| r / f.max(LOG_EPS))
        .collect())
}

fn guarded_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn pressure_ratio_features(
    rotation_pressure: &[f64],
    feed_pressure: &[f64],
    fob: &[f64],
) -> Result<PrIndicators, FeatureError> {
    if fob.len() != rotation_pressure.len() {
        return Err(FeatureError::LengthMismatch);
    }
    let pr = pressure_ratio(rotation_pressure, feed_pressure)?;
    require_len(&pr, 3)?;

    let sad = pr.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>();
    let spr2 = pr.iter().map(|v| v * v).sum::<f64>();
    let sdpr2 = pr.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>();
    let sddpr2 = pr
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).powi(2))
        .sum::<f64>();
    let max_pr = pr.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_fob = fob.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(PrIndicators {
        sad,
        log_spr2: (spr2 + LOG_EPS).ln(),
        sdpr2,
        sddpr2,
        log_ratio1: (guarded_ratio(sdpr2, spr2) + LOG_EPS).ln(),
        log_ratio2: (guarded_ratio(sddpr2, sdpr2) + LOG_EPS).ln(),
        maxpr_maxfob: max_pr * max_fob,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_ratio_has_no_variation() {
        let feed = [1.0, 2.0, 3.0, 4.0];
        let rot: Vec<f64> = feed.iter().map(|f| 2.0 * f).collect();
        let pr = pressure_ratio_features(&rot, &feed, &[9.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((pr.sad, pr.sdpr2, pr.sddpr2), (0.0, 0.0, 0.0));
        assert!((pr.log_spr2 - 16f64.ln()).abs() < 1e-12);
        assert_eq!(pr.log_ratio1, LOG_EPS.ln());
        assert_eq!(pr.log_ratio2, LOG_EPS.ln());
        assert_eq!(pr.maxpr_maxfob, 18.0);
    }

    #[test]
    fn max_product() {
        let pr = pressure_ratio_features(&[1.0; 3], &[1.0; 3], &[5.0, 2.0, 1.0]).unwrap();
        assert_eq!(pr.maxpr_maxfob, 5.0);
    }

    #[test]
    fn zero_feed_pressure_is_guarded() {
        let pr = pressure_ratio(&[1.0, 1.0], &[0.0, -3.0]).unwrap();
        assert!(pr.iter().all(|v| v.is_finite() && *v > 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            pressure_ratio_features(&[1.0; 2], &[1.0; 2], &[1.0; 2]),
            Err(FeatureError::TooShort { .. })
        ));
        assert_eq!(
            pressure_ratio_features(&[1.0; 3], &[1.0; 4], &[1.0; 3]),
            Err(FeatureError::LengthMismatch)
        );
    }
}
