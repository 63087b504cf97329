use serde::{Deserialize, Serialize};

use super::{require_len, FeatureError};

/// Activity, mobility and complexity of a sampled signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HjorthTriple {
    pub activity: f64,
    pub mobility: f64,
    pub complexity: f64,
}

/// Hjorth parameters from the spectral moments m0, m2 and m4, evaluated in
/// the time domain through Parseval's identity.
///
/// `m0` is the plain sum of squares; `m2` and `m4` are the sums of squared
/// first and second differences, both divided by the original length N even
/// though the difference sequences are shorter. A zero denominator moment
/// makes the dependent ratio zero, so constant signals give mobility and
/// complexity of 0.
pub fn hjorth(x: &[f64]) -> Result<HjorthTriple, FeatureError> {
    require_len(x, 3)?;
    let n = x.len() as f64;
    let m0: f64 = x.iter().map(|v| v * v).sum();
    let m2: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>() / n;
    let m4: f64 = x
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]).powi(2))
        .sum::<f64>()
        / n;

    let mobility = if m0 > 0.0 { (m2 / m0).sqrt() } else { 0.0 };
    let complexity = if m2 > 0.0 && mobility > 0.0 {
        (m4 / m2).sqrt() / mobility
    } else {
        0.0
    };
    Ok(HjorthTriple {
        activity: m0,
        mobility,
        complexity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal() {
        let h = hjorth(&[1.0; 4]).unwrap();
        assert_eq!(h.activity, 4.0);
        assert_eq!(h.mobility, 0.0);
        assert_eq!(h.complexity, 0.0);
    }

    #[test]
    fn all_zero_signal() {
        let h = hjorth(&[0.0; 3]).unwrap();
        assert_eq!((h.activity, h.mobility, h.complexity), (0.0, 0.0, 0.0));
    }

    #[test]
    fn alternating_signal() {
        // differences [-2, 2, -2] -> m2 = 12/4 = 3
        // second differences [4, -4] -> m4 = 32/4 = 8
        let h = hjorth(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_eq!(h.activity, 4.0);
        assert!((h.mobility - (3.0f64 / 4.0).sqrt()).abs() < 1e-15);
        assert!((h.complexity - 4.0 * 2f64.sqrt() / 3.0).abs() < 1e-14);
    }

    #[test]
    fn too_short() {
        assert_eq!(
            hjorth(&[1.0, 2.0]),
            Err(FeatureError::TooShort { len: 2, min: 3 })
        );
    }
}
