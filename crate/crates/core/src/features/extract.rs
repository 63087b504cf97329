use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    descriptive_stats, flatness_with, hjorth, pressure_ratio, pressure_ratio_features,
    svd_entropy, waveform_length, FeatureError, DEFAULT_EMBED_DIM,
};
use crate::datamodel::{HoleSignalSet, SignalName};
use crate::linalg::Matrix;

/// Per-signal extractors in registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Extractor {
    HjorthActivity,
    HjorthMobility,
    HjorthComplexity,
    WaveformLength,
    Ssi,
    CrestFactor,
    Flatness,
    SvdEntropy,
    Max,
    StdDev,
    Skewness,
    Kurtosis,
    Mean,
    GeometricMean,
    Median,
}

impl Extractor {
    pub const ALL: [Extractor; 15] = [
        Extractor::HjorthActivity,
        Extractor::HjorthMobility,
        Extractor::HjorthComplexity,
        Extractor::WaveformLength,
        Extractor::Ssi,
        Extractor::CrestFactor,
        Extractor::Flatness,
        Extractor::SvdEntropy,
        Extractor::Max,
        Extractor::StdDev,
        Extractor::Skewness,
        Extractor::Kurtosis,
        Extractor::Mean,
        Extractor::GeometricMean,
        Extractor::Median,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Extractor::HjorthActivity => "hjorth_activity",
            Extractor::HjorthMobility => "hjorth_mobility",
            Extractor::HjorthComplexity => "hjorth_complexity",
            Extractor::WaveformLength => "waveform_length",
            Extractor::Ssi => "ssi",
            Extractor::CrestFactor => "crest_factor",
            Extractor::Flatness => "flatness",
            Extractor::SvdEntropy => "svd_entropy",
            Extractor::Max => "max",
            Extractor::StdDev => "std",
            Extractor::Skewness => "skewness",
            Extractor::Kurtosis => "kurtosis",
            Extractor::Mean => "mean",
            Extractor::GeometricMean => "geometric_mean",
            Extractor::Median => "median",
        }
    }

    fn min_len(self, embed_dim: usize) -> usize {
        match self {
            Extractor::HjorthActivity | Extractor::HjorthMobility | Extractor::HjorthComplexity => 3,
            Extractor::WaveformLength => 2,
            Extractor::Ssi | Extractor::CrestFactor | Extractor::Flatness => 1,
            Extractor::SvdEntropy => 2 * embed_dim,
            _ => 2,
        }
    }
}

/// Names of the pressure-ratio indicator columns, in order.
pub const PR_FEATURES: [&str; 7] = [
    "pr__sad",
    "pr__log_spr2",
    "pr__sdpr2",
    "pr__sddpr2",
    "pr__log_ratio1",
    "pr__log_ratio2",
    "pr__maxpr_maxfob",
];

/// Channel name used when the pressure ratio is also treated as a signal.
pub const PRESSURE_RATIO_CHANNEL: &str = "pressureRatio";

/// How features that need strictly positive input treat samples `<= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PositivityPolicy {
    /// Shift the signal by `-min + 1e-9 * range`.
    #[default]
    Offset,
    /// Fail the extractor (the column is then dropped).
    Reject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub signals: Vec<SignalName>,
    pub extractors: Vec<Extractor>,
    pub embed_dim: usize,
    pub positivity: PositivityPolicy,
    /// Append the seven pressure-ratio indicators.
    pub pressure_ratio_indicators: bool,
    /// Also run the per-signal extractors on the pressure ratio itself.
    pub pressure_ratio_channel: bool,
    /// Emit the raw SPR2 sum next to its logarithm.
    pub raw_spr2: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            signals: SignalName::ALL.to_vec(),
            extractors: Extractor::ALL.to_vec(),
            embed_dim: DEFAULT_EMBED_DIM,
            positivity: PositivityPolicy::Offset,
            pressure_ratio_indicators: true,
            pressure_ratio_channel: false,
            raw_spr2: false,
        }
    }
}

impl FeatureConfig {
    fn canonical_signals(&self) -> Vec<SignalName> {
        let mut s = self.signals.clone();
        s.sort();
        s.dedup();
        s
    }

    fn canonical_extractors(&self) -> Vec<Extractor> {
        let mut e = self.extractors.clone();
        e.sort();
        e.dedup();
        e
    }

    /// Column names, `<signal>__<feature>`, in deterministic order.
    pub fn registry(&self) -> Vec<String> {
        let extractors = self.canonical_extractors();
        let mut channels: Vec<String> = self
            .canonical_signals()
            .iter()
            .map(|s| s.as_str().to_string())
            .collect();
        if self.pressure_ratio_channel {
            channels.push(PRESSURE_RATIO_CHANNEL.to_string());
        }
        let mut names = Vec::new();
        for c in &channels {
            for e in &extractors {
                names.push(format!("{c}__{}", e.as_str()));
            }
        }
        if self.pressure_ratio_indicators {
            names.extend(PR_FEATURES.iter().map(|s| s.to_string()));
            if self.raw_spr2 {
                names.push("pr__spr2".to_string());
            }
        }
        names
    }

    fn min_len(&self) -> usize {
        let per_signal = self
            .extractors
            .iter()
            .filter(|e| **e != Extractor::SvdEntropy)
            .map(|e| e.min_len(self.embed_dim))
            .max();
        let pr = self.pressure_ratio_indicators.then_some(3);
        per_signal.into_iter().chain(pr).max().unwrap_or(1)
    }
}

/// Feature values of one hole. Failed extractors hold `NaN`, which the
/// dataset-level assembly turns into a dropped column.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub registry: Arc<[String]>,
    /// `(column index, reason)` for every extractor that failed.
    pub failures: Vec<(usize, FeatureError)>,
}

impl FeatureVector {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }
}

fn channel_features(
    x: &[f64],
    extractors: &[Extractor],
    cfg: &FeatureConfig,
    out: &mut Vec<Result<f64, FeatureError>>,
) {
    let needs_hjorth = extractors.iter().any(|e| {
        matches!(
            e,
            Extractor::HjorthActivity | Extractor::HjorthMobility | Extractor::HjorthComplexity
        )
    });
    let hj = needs_hjorth.then(|| hjorth(x));
    let needs_stats = extractors.iter().any(|e| *e >= Extractor::Max);
    let st = needs_stats.then(|| descriptive_stats(x, cfg.positivity));
    for e in extractors {
        let v = match e {
            Extractor::HjorthActivity => hj.clone().unwrap().map(|h| h.activity),
            Extractor::HjorthMobility => hj.clone().unwrap().map(|h| h.mobility),
            Extractor::HjorthComplexity => hj.clone().unwrap().map(|h| h.complexity),
            Extractor::WaveformLength => waveform_length(x),
            Extractor::Ssi => Ok(super::ssi(x)),
            Extractor::CrestFactor => super::crest_factor(x),
            Extractor::Flatness => flatness_with(x, cfg.positivity),
            Extractor::SvdEntropy => svd_entropy(x, cfg.embed_dim),
            Extractor::Max => st.clone().unwrap().map(|s| s.max),
            Extractor::StdDev => st.clone().unwrap().map(|s| s.std_dev),
            Extractor::Skewness => st.clone().unwrap().map(|s| s.skewness),
            Extractor::Kurtosis => st.clone().unwrap().map(|s| s.kurtosis),
            Extractor::Mean => st.clone().unwrap().map(|s| s.mean),
            Extractor::GeometricMean => st.clone().unwrap().map(|s| s.geometric_mean),
            Extractor::Median => st.clone().unwrap().map(|s| s.median),
        };
        out.push(v.and_then(|v| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(FeatureError::DegenerateMatrix)
            }
        }));
    }
}

/// Computes the configured features of one hole.
pub fn extract_hole_features(
    hole: &HoleSignalSet,
    cfg: &FeatureConfig,
) -> Result<FeatureVector, FeatureError> {
    let registry: Arc<[String]> = cfg.registry().into();
    extract_with_registry(hole, cfg, registry)
}

fn extract_with_registry(
    hole: &HoleSignalSet,
    cfg: &FeatureConfig,
    registry: Arc<[String]>,
) -> Result<FeatureVector, FeatureError> {
    let n = hole.len();
    let min = cfg.min_len();
    if n < min {
        return Err(FeatureError::TooShort { len: n, min });
    }
    let extractors = cfg.canonical_extractors();
    let mut results = Vec::with_capacity(registry.len());
    for s in cfg.canonical_signals() {
        channel_features(hole.signal(s), &extractors, cfg, &mut results);
    }
    if cfg.pressure_ratio_channel {
        let pr = pressure_ratio(
            hole.signal(SignalName::RotationPressure),
            hole.signal(SignalName::FeedPressure),
        )?;
        channel_features(&pr, &extractors, cfg, &mut results);
    }
    if cfg.pressure_ratio_indicators {
        match pressure_ratio_features(
            hole.signal(SignalName::RotationPressure),
            hole.signal(SignalName::FeedPressure),
            hole.signal(SignalName::Fob),
        ) {
            Ok(pr) => {
                results.extend(pr.to_array().map(Ok));
                if cfg.raw_spr2 {
                    results.push(Ok(pr.log_spr2.exp() - super::LOG_EPS));
                }
            }
            Err(e) => {
                let k = PR_FEATURES.len() + usize::from(cfg.raw_spr2);
                results.extend(std::iter::repeat_n(Err(e), k));
            }
        }
    }
    debug_assert_eq!(results.len(), registry.len());

    let mut values = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => values.push(v),
            Err(e) => {
                values.push(f64::NAN);
                failures.push((i, e));
            }
        }
    }
    Ok(FeatureVector {
        values,
        registry,
        failures,
    })
}

/// A column removed because an extractor failed on at least one hole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroppedColumn {
    pub name: String,
    /// First hole on which the extractor failed.
    pub hole_id: String,
    pub reason: String,
}

/// Rectangular feature matrix: one row per hole, one column per registry name.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub hole_ids: Vec<String>,
    pub names: Vec<String>,
    pub data: Matrix,
    pub dropped: Vec<DroppedColumn>,
}

/// Extracts features for every hole, dropping any column on which an
/// extractor failed for some hole.
pub fn extract_features<'a, I>(holes: I, cfg: &FeatureConfig) -> Result<FeatureTable, FeatureError>
where
    I: IntoIterator<Item = &'a HoleSignalSet>,
{
    let registry: Arc<[String]> = cfg.registry().into();
    let mut hole_ids = Vec::new();
    let mut rows = Vec::new();
    let mut first_failure: Vec<Option<(String, String)>> = vec![None; registry.len()];
    for h in holes {
        let fv = extract_with_registry(h, cfg, registry.clone())?;
        for (i, e) in &fv.failures {
            if first_failure[*i].is_none() {
                first_failure[*i] = Some((h.hole_id.clone(), e.to_string()));
            }
        }
        hole_ids.push(h.hole_id.clone());
        rows.push(fv.values);
    }
    let keep: Vec<usize> = (0..registry.len())
        .filter(|i| first_failure[*i].is_none())
        .collect();
    let dropped: Vec<DroppedColumn> = first_failure
        .into_iter()
        .enumerate()
        .filter_map(|(i, f)| {
            f.map(|(hole_id, reason)| DroppedColumn {
                name: registry[i].clone(),
                hole_id,
                reason,
            })
        })
        .collect();
    for d in &dropped {
        log::warn!("dropping feature {} ({} on hole {})", d.name, d.reason, d.hole_id);
    }
    let names = keep.iter().map(|&i| registry[i].clone()).collect();
    let mut data = Matrix::zeros(rows.len(), keep.len());
    for (r, row) in rows.iter().enumerate() {
        for (c, &i) in keep.iter().enumerate() {
            data[(r, c)] = row[i];
        }
    }
    Ok(FeatureTable {
        hole_ids,
        names,
        data,
        dropped,
    })
}

impl FeatureTable {
    /// Wraps a bare matrix with generated hole ids `h0..` and column names `x0..`.
    pub fn from_matrix(data: Matrix) -> FeatureTable {
        FeatureTable {
            hole_ids: (0..data.nrows()).map(|i| format!("h{i}")).collect(),
            names: (0..data.ncols()).map(|j| format!("x{j}")).collect(),
            data,
            dropped: Vec::new(),
        }
    }

    /// Appends one named column (e.g. a lab assay used as an extra input).
    pub fn with_column(&self, name: &str, values: &[f64]) -> FeatureTable {
        let mut names = self.names.clone();
        names.push(name.to_string());
        FeatureTable {
            hole_ids: self.hole_ids.clone(),
            names,
            data: self.data.with_column(values),
            dropped: self.dropped.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.hole_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hole_ids.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row_index(&self, hole_id: &str) -> Option<usize> {
        self.hole_ids.iter().position(|h| h == hole_id)
    }

    /// Digest of the column names; models refuse inputs whose digest differs.
    pub fn registry_hash(&self) -> String {
        crate::models::registry_hash(&self.names)
    }

    /// Rows in the given order.
    pub fn select(&self, rows: &[usize]) -> FeatureTable {
        FeatureTable {
            hole_ids: rows.iter().map(|&r| self.hole_ids[r].clone()).collect(),
            names: self.names.clone(),
            data: self.data.select_rows(rows),
            dropped: self.dropped.clone(),
        }
    }

    /// `hole_id` then the registry names; one row per hole.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hole_id");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (r, id) in self.hole_ids.iter().enumerate() {
            out.push_str(id);
            for v in self.data.row(r) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Reads a table written by [`FeatureTable::to_csv`].
pub fn read_feature_csv(text: &str) -> Result<FeatureTable, FeatureError> {
    let err = |e: String| FeatureError::Csv(e);
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| err(e.to_string()))?.clone();
    if headers.get(0) != Some("hole_id") {
        return Err(err("first column must be hole_id".into()));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut hole_ids = Vec::new();
    let mut values = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        hole_ids.push(rec[0].to_string());
        for (c, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| err(format!("row {}: bad value `{cell}` in {}", row + 1, names[c])))?;
            if !v.is_finite() {
                return Err(err(format!("row {}: non-finite {}", row + 1, names[c])));
            }
            values.push(v);
        }
    }
    let data = Matrix::from_vec(hole_ids.len(), names.len(), values);
    Ok(FeatureTable {
        hole_ids,
        names,
        data,
        dropped: Vec::new(),
    })
}
