use super::{positivity_shift, require_len, FeatureError, PositivityPolicy};

/// Cumulative absolute first difference.
pub fn waveform_length(x: &[f64]) -> Result<f64, FeatureError> {
    require_len(x, 2)?;
    Ok(x.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// Simple square integral: total signal energy.
pub fn ssi(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (ssi(x) / x.len() as f64).sqrt()
}

/// Peak magnitude over RMS. Always at least 1 for a non-zero signal.
pub fn crest_factor(x: &[f64]) -> Result<f64, FeatureError> {
    require_len(x, 1)?;
    let r = rms(x);
    if r == 0.0 {
        return Err(FeatureError::ZeroSignal);
    }
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(peak / r)
}

/// Geometric over arithmetic mean of a strictly positive signal, computed in
/// log form. Lies in (0, 1], equal to 1 only for a constant signal.
pub fn flatness(x: &[f64]) -> Result<f64, FeatureError> {
    require_len(x, 1)?;
    if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| **v <= 0.0) {
        return Err(FeatureError::NonPositiveSample { index, value });
    }
    if x.iter().all(|v| *v == x[0]) {
        return Ok(1.0);
    }
    let n = x.len() as f64;
    let log_mean = x.iter().map(|v| v.ln()).sum::<f64>() / n;
    let mean = x.iter().sum::<f64>() / n;
    // rounding can push a constant signal a hair above 1
    Ok((log_mean.exp() / mean).min(1.0))
}

/// Flatness with the configured handling of non-positive samples.
pub fn flatness_with(x: &[f64], policy: PositivityPolicy) -> Result<f64, FeatureError> {
    match policy {
        PositivityPolicy::Reject => flatness(x),
        PositivityPolicy::Offset => {
            let shift = positivity_shift(x);
            if shift == 0.0 {
                flatness(x)
            } else {
                let shifted: Vec<f64> = x.iter().map(|v| v + shift).collect();
                flatness(&shifted)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waveform_length_cases() {
        assert_eq!(waveform_length(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(waveform_length(&[0.0, 1.0, 0.0, 1.0]).unwrap(), 3.0);
        assert!(waveform_length(&[1.0]).is_err());
    }

    #[test]
    fn ssi_cases() {
        assert_eq!(ssi(&[1.0, 2.0, 3.0]), 14.0);
        assert_eq!(ssi(&[0.0; 5]), 0.0);
    }

    #[test]
    fn crest_factor_cases() {
        assert!((crest_factor(&[-2.5; 6]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(crest_factor(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(crest_factor(&[0.0; 4]), Err(FeatureError::ZeroSignal));
    }

    #[test]
    fn flatness_cases() {
        assert_eq!(flatness(&[5.0, 5.0, 5.0]).unwrap(), 1.0);
        assert!((flatness(&[1.0, 4.0]).unwrap() - 0.8).abs() < 1e-15);
        let eps = 1e-6;
        let f = flatness(&[10.0, eps, eps, eps]).unwrap();
        // geo = (10 e^3)^(1/4), arith = (10 + 3e)/4
        let expected = (10.0 * eps.powi(3)).powf(0.25) / ((10.0 + 3.0 * eps) / 4.0);
        assert!((f - expected).abs() < 1e-12);
        assert!(f < 0.01);
        assert!(matches!(
            flatness(&[1.0, 0.0]),
            Err(FeatureError::NonPositiveSample { index: 1, .. })
        ));
    }

    #[test]
    fn offset_policy_accepts_signed_signals() {
        let f = flatness_with(&[-1.0, 0.0, 1.0], PositivityPolicy::Offset).unwrap();
        assert!(f > 0.0 && f <= 1.0);
        assert_eq!(
            flatness_with(&[0.0; 3], PositivityPolicy::Offset).unwrap(),
            1.0
        );
        assert!(flatness_with(&[-1.0, 1.0], PositivityPolicy::Reject).is_err());
    }
}
