//! Per-hole signal descriptors: Hjorth parameters, waveform length, energy,
//! crest factor, flatness, singular-value entropy, descriptive statistics
//! and the pressure-ratio indicators, plus assembly into a feature table.

mod extract;
mod hjorth;
mod pressure;
mod stats;
mod svd_entropy;
mod waveform;

use thiserror::Error;

pub use extract::{
    extract_features, extract_hole_features, read_feature_csv, DroppedColumn, Extractor,
    FeatureConfig, FeatureTable, FeatureVector, PositivityPolicy, PR_FEATURES,
};
pub use hjorth::{hjorth, HjorthTriple};
pub use pressure::{pressure_ratio, pressure_ratio_features, PrIndicators};
pub use stats::{descriptive_stats, geometric_mean, median, DescriptiveStats};
pub use svd_entropy::{singular_values, svd_entropy, DEFAULT_EMBED_DIM};
pub use waveform::{crest_factor, flatness, flatness_with, rms, ssi, waveform_length};

/// Additive guard inside logarithms and ratio denominators.
pub const LOG_EPS: f64 = 1e-12;

/// Fraction of a signal's range added above its minimum when shifting a
/// non-positive signal for geometric-mean based features.
pub const OFFSET_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("signal too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },
    #[error("signal is identically zero")]
    ZeroSignal,
    #[error("non-positive sample {value} at index {index}")]
    NonPositiveSample { index: usize, value: f64 },
    #[error("trajectory matrix has no non-zero singular value")]
    DegenerateMatrix,
    #[error("embedding dimension must be at least 2, got {0}")]
    BadEmbedDim(usize),
    #[error("signals have different lengths")]
    LengthMismatch,
    #[error("feature csv: {0}")]
    Csv(String),
}

pub(crate) fn require_len(x: &[f64], min: usize) -> Result<(), FeatureError> {
    if x.len() < min {
        Err(FeatureError::TooShort { len: x.len(), min })
    } else {
        Ok(())
    }
}

/// Shift that makes every sample strictly positive: zero when the signal is
/// already positive, otherwise `-min + OFFSET_EPS * range` (falling back to
/// an absolute epsilon for constant signals).
pub fn positivity_shift(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo > 0.0 {
        return 0.0;
    }
    let range = hi - lo;
    let eps = if range > 0.0 {
        OFFSET_EPS * range
    } else {
        OFFSET_EPS * lo.abs().max(1.0)
    };
    -lo + eps
}
