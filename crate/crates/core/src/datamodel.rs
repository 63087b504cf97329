//! Typed MWD hole records, per-hole labels and the CSV formats used to move
//! them between tools.
//!
//! An MWD file carries one row per depth sample; rows of one hole must be
//! contiguous and ordered by depth. A labels file carries one row per hole
//! with any subset of the assay and material columns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default depth discretization of the drill logs, in metres.
pub const DEFAULT_DEPTH_STEP: f64 = 0.1;

/// Tolerated deviation of a depth increment from the nominal step.
pub const DEPTH_STEP_TOLERANCE: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DataError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("hole `{hole}`: depth not strictly increasing at row {row}")]
    NonMonotonicDepth { hole: String, row: usize },
    #[error("hole `{hole}`: depth increment {step} at row {row} deviates from the {expected} m grid")]
    IrregularDepth {
        hole: String,
        row: usize,
        step: f64,
        expected: f64,
    },
    #[error("hole `{hole}`: signal `{signal}` has a missing sample at row {row}")]
    RaggedSignals {
        hole: String,
        signal: String,
        row: usize,
    },
    #[error("hole `{hole}`: non-finite value in `{column}` at row {row}")]
    NonFiniteSample {
        hole: String,
        column: String,
        row: usize,
    },
    #[error("hole `{0}` has fewer than two samples")]
    TooFewSamples(String),
    #[error("rows of hole `{0}` are not contiguous")]
    NonContiguousHole(String),
    #[error("hole `{hole}`: `{column}` changes within the hole")]
    InconsistentMetadata { hole: String, column: String },
    #[error("duplicate hole id `{0}`")]
    DuplicateHole(String),
    #[error("hole `{hole}`: negative assay {assay} = {value}")]
    NegativeAssay {
        hole: String,
        assay: Assay,
        value: f64,
    },
    #[error("hole `{hole}`: material {code} = {value} is outside [0, 100]")]
    PercentOutOfRange {
        hole: String,
        code: String,
        value: f64,
    },
    #[error("row {row}: cannot parse `{value}` in column `{column}`")]
    BadNumber {
        row: usize,
        column: String,
        value: String,
    },
    #[error("invalid hole record: {0}")]
    InvalidHole(String),
    #[error("csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for DataError {
    fn from(e: csv::Error) -> Self {
        DataError::Csv(e.to_string())
    }
}

/// The eleven logged MWD channels, in canonical registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SignalName {
    Duration,
    Depth,
    RotationRpm,
    AirPressure,
    FeedPressure,
    Torque,
    Rop,
    Fob,
    RotationPressure,
    Apr,
    Sed,
}

impl SignalName {
    pub const ALL: [SignalName; 11] = [
        SignalName::Duration,
        SignalName::Depth,
        SignalName::RotationRpm,
        SignalName::AirPressure,
        SignalName::FeedPressure,
        SignalName::Torque,
        SignalName::Rop,
        SignalName::Fob,
        SignalName::RotationPressure,
        SignalName::Apr,
        SignalName::Sed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalName::Duration => "duration",
            SignalName::Depth => "depth",
            SignalName::RotationRpm => "rotationRPM",
            SignalName::AirPressure => "airPressure",
            SignalName::FeedPressure => "feedPressure",
            SignalName::Torque => "torque",
            SignalName::Rop => "rop",
            SignalName::Fob => "fob",
            SignalName::RotationPressure => "rotationPressure",
            SignalName::Apr => "apr",
            SignalName::Sed => "sed",
        }
    }
}

impl fmt::Display for SignalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalName {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SignalName::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| DataError::UnknownColumn(s.to_string()))
    }
}

/// Laboratory assay codes (mass %).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Assay {
    Al2O3,
    Fe,
    SiO2,
    P,
    S,
    Mn,
    MgO,
    TiO2,
    CaO,
    Loi,
}

impl Assay {
    pub const ALL: [Assay; 10] = [
        Assay::Al2O3,
        Assay::Fe,
        Assay::SiO2,
        Assay::P,
        Assay::S,
        Assay::Mn,
        Assay::MgO,
        Assay::TiO2,
        Assay::CaO,
        Assay::Loi,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Assay::Al2O3 => "Al2O3",
            Assay::Fe => "Fe",
            Assay::SiO2 => "SiO2",
            Assay::P => "P",
            Assay::S => "S",
            Assay::Mn => "Mn",
            Assay::MgO => "MgO",
            Assay::TiO2 => "TiO2",
            Assay::CaO => "CaO",
            Assay::Loi => "LOI",
        }
    }
}

impl fmt::Display for Assay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Assay {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Assay::ALL
            .iter()
            .copied()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| DataError::UnknownColumn(s.to_string()))
    }
}

/// Material type codes accepted as label columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaterialRegistry {
    codes: BTreeSet<String>,
}

impl MaterialRegistry {
    /// Shale, banded iron formation and the other six logged types used in
    /// the material-presence experiments.
    pub const DEFAULT_CODES: [&'static str; 8] =
        ["SHL", "BIF", "BPO", "GOL", "HGM", "HGF", "SHF", "GMO"];

    pub fn new<I, S>(codes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        MaterialRegistry {
            codes: codes.into_iter().map(Into::into).collect(),
        }
    }

    pub fn register(&mut self, code: impl Into<String>) {
        self.codes.insert(code.into());
    }

    pub fn contains(&self, code: &str) -> bool {
        self.codes.contains(code)
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.codes.iter().map(String::as_str)
    }
}

impl Default for MaterialRegistry {
    fn default() -> Self {
        MaterialRegistry::new(Self::DEFAULT_CODES)
    }
}

/// One blast-hole's MWD record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoleSignalSet {
    pub hole_id: String,
    pub blast_id: String,
    pub collar_x: f64,
    pub collar_y: f64,
    pub depth_step: f64,
    pub hole_depth: f64,
    signals: BTreeMap<SignalName, Vec<f64>>,
}

impl HoleSignalSet {
    /// Builds a hole record, checking that all eleven channels are present,
    /// equally long (at least two samples) and finite.
    pub fn new(
        hole_id: impl Into<String>,
        blast_id: impl Into<String>,
        collar: (f64, f64),
        depth_step: f64,
        signals: BTreeMap<SignalName, Vec<f64>>,
    ) -> Result<Self, DataError> {
        let hole_id = hole_id.into();
        if !(depth_step > 0.0 && depth_step.is_finite()) {
            return Err(DataError::InvalidHole(format!(
                "{hole_id}: depth_step must be positive"
            )));
        }
        let mut len = None;
        for name in SignalName::ALL {
            let s = signals
                .get(&name)
                .ok_or_else(|| DataError::MissingColumn(name.as_str().to_string()))?;
            match len {
                None => len = Some(s.len()),
                Some(n) if n != s.len() => {
                    return Err(DataError::RaggedSignals {
                        hole: hole_id,
                        signal: name.as_str().to_string(),
                        row: n.min(s.len()),
                    })
                }
                _ => {}
            }
            if let Some(row) = s.iter().position(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteSample {
                    hole: hole_id,
                    column: name.as_str().to_string(),
                    row,
                });
            }
        }
        let n = len.unwrap_or(0);
        if n < 2 {
            return Err(DataError::TooFewSamples(hole_id));
        }
        Ok(HoleSignalSet {
            hole_id,
            blast_id: blast_id.into(),
            collar_x: collar.0,
            collar_y: collar.1,
            depth_step,
            hole_depth: n as f64 * depth_step,
            signals,
        })
    }

    pub fn len(&self) -> usize {
        self.signals.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn signal(&self, name: SignalName) -> &[f64] {
        &self.signals[&name]
    }

    pub fn signals(&self) -> impl Iterator<Item = (SignalName, &[f64])> {
        self.signals.iter().map(|(k, v)| (*k, v.as_slice()))
    }
}

/// Per-hole targets. Absent cells are absent keys, never zeros.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LabelRecord {
    pub hole_id: String,
    pub assays: BTreeMap<Assay, f64>,
    pub materials: BTreeMap<String, f64>,
}

impl LabelRecord {
    pub fn has_chemistry(&self) -> bool {
        !self.assays.is_empty()
    }

    pub fn has_materials(&self) -> bool {
        !self.materials.is_empty()
    }

    pub fn assay(&self, assay: Assay) -> Option<f64> {
        self.assays.get(&assay).copied()
    }

    pub fn material(&self, code: &str) -> Option<f64> {
        self.materials.get(code).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JoinMode {
    Material,
    Chemistry,
    Both,
}

/// Holes paired with their labels, if any. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    holes: Vec<(HoleSignalSet, Option<LabelRecord>)>,
    pub region_tag: String,
}

impl Dataset {
    pub fn new(
        holes: Vec<(HoleSignalSet, Option<LabelRecord>)>,
        region_tag: impl Into<String>,
    ) -> Result<Self, DataError> {
        let mut seen = BTreeSet::new();
        for (h, l) in &holes {
            if !seen.insert(h.hole_id.as_str()) {
                return Err(DataError::DuplicateHole(h.hole_id.clone()));
            }
            if let Some(l) = l {
                if l.hole_id != h.hole_id {
                    return Err(DataError::InvalidHole(format!(
                        "label `{}` attached to hole `{}`",
                        l.hole_id, h.hole_id
                    )));
                }
            }
        }
        Ok(Dataset {
            holes,
            region_tag: region_tag.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.holes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.holes.is_empty()
    }

    pub fn holes(&self) -> &[(HoleSignalSet, Option<LabelRecord>)] {
        &self.holes
    }

    pub fn signal_sets(&self) -> impl Iterator<Item = &HoleSignalSet> {
        self.holes.iter().map(|(h, _)| h)
    }

    pub fn labels(&self) -> impl Iterator<Item = Option<&LabelRecord>> {
        self.holes.iter().map(|(_, l)| l.as_ref())
    }

    pub fn hole_ids(&self) -> impl Iterator<Item = &str> {
        self.holes.iter().map(|(h, _)| h.hole_id.as_str())
    }
}

/// Bookkeeping from [`join`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JoinSummary {
    /// Label rows whose hole id matched no MWD hole.
    pub unmatched_labels: usize,
    /// Repeated hole ids skipped (first occurrence kept).
    pub duplicate_holes: usize,
}

/// Keeps only the holes that carry the requested kinds of label.
pub fn join(
    holes: Vec<HoleSignalSet>,
    labels: Vec<LabelRecord>,
    mode: JoinMode,
    region_tag: &str,
) -> (Dataset, JoinSummary) {
    let mut summary = JoinSummary::default();
    let known: BTreeSet<&str> = holes.iter().map(|h| h.hole_id.as_str()).collect();
    let mut by_id: HashMap<String, LabelRecord> = HashMap::new();
    for l in labels {
        if !known.contains(l.hole_id.as_str()) {
            summary.unmatched_labels += 1;
            continue;
        }
        by_id.entry(l.hole_id.clone()).or_insert(l);
    }
    if summary.unmatched_labels > 0 {
        log::warn!(
            "{} label rows reference unknown holes and were dropped",
            summary.unmatched_labels
        );
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for h in holes {
        if !seen.insert(h.hole_id.clone()) {
            summary.duplicate_holes += 1;
            continue;
        }
        let Some(label) = by_id.remove(&h.hole_id) else {
            continue;
        };
        let keep = match mode {
            JoinMode::Material => label.has_materials(),
            JoinMode::Chemistry => label.has_chemistry(),
            JoinMode::Both => label.has_materials() && label.has_chemistry(),
        };
        if keep {
            out.push((h, Some(label)));
        }
    }
    let dataset = Dataset {
        holes: out,
        region_tag: region_tag.to_string(),
    };
    (dataset, summary)
}

/// Column order of the MWD CSV format.
pub const MWD_HEADER: [&str; 15] = [
    "hole_id",
    "blast_id",
    "collar_x",
    "collar_y",
    "depth",
    "duration",
    "rotationRPM",
    "airPressure",
    "feedPressure",
    "torque",
    "rop",
    "fob",
    "rotationPressure",
    "apr",
    "sed",
];

fn parse_cell(row: usize, column: &str, raw: &str) -> Result<Option<f64>, DataError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>()
        .map(Some)
        .map_err(|_| DataError::BadNumber {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        })
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

struct HoleBuilder {
    hole_id: String,
    blast_id: String,
    collar: (f64, f64),
    last_depth: Option<f64>,
    signals: BTreeMap<SignalName, Vec<f64>>,
}

/// Parses an MWD CSV on the default 0.1 m grid.
pub fn parse_mwd_csv(text: &str) -> Result<Vec<HoleSignalSet>, DataError> {
    parse_mwd_csv_with_step(text, DEFAULT_DEPTH_STEP)
}

/// Parses an MWD CSV; depth increments must lie within ±10% of `depth_step`.
pub fn parse_mwd_csv_with_step(
    text: &str,
    depth_step: f64,
) -> Result<Vec<HoleSignalSet>, DataError> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers()?.clone();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, h) in headers.iter().enumerate() {
        if !MWD_HEADER.contains(&h) {
            return Err(DataError::UnknownColumn(h.to_string()));
        }
        index.insert(h, i);
    }
    for col in MWD_HEADER {
        if !index.contains_key(col) {
            return Err(DataError::MissingColumn(col.to_string()));
        }
    }

    let mut holes = Vec::new();
    let mut finished: BTreeSet<String> = BTreeSet::new();
    let mut current: Option<HoleBuilder> = None;

    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row + 1;
        let hole_id = record[index["hole_id"]].to_string();
        let blast_id = record[index["blast_id"]].to_string();
        let num = |col: &str| -> Result<Option<f64>, DataError> {
            parse_cell(row, col, &record[index[col]])
        };
        let require = |col: &str, hole: &str| -> Result<f64, DataError> {
            let v = num(col)?.ok_or_else(|| DataError::RaggedSignals {
                hole: hole.to_string(),
                signal: col.to_string(),
                row,
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFiniteSample {
                    hole: hole.to_string(),
                    column: col.to_string(),
                    row,
                });
            }
            Ok(v)
        };
        let collar = (require("collar_x", &hole_id)?, require("collar_y", &hole_id)?);

        let switch = current.as_ref().is_none_or(|c| c.hole_id != hole_id);
        if switch {
            if let Some(done) = current.take() {
                finished.insert(done.hole_id.clone());
                holes.push(finish_hole(done, depth_step)?);
            }
            if finished.contains(&hole_id) {
                return Err(DataError::NonContiguousHole(hole_id));
            }
            current = Some(HoleBuilder {
                hole_id: hole_id.clone(),
                blast_id: blast_id.clone(),
                collar,
                last_depth: None,
                signals: SignalName::ALL.iter().map(|s| (*s, Vec::new())).collect(),
            });
        }
        let b = current.as_mut().expect("current hole");
        if b.blast_id != blast_id {
            return Err(DataError::InconsistentMetadata {
                hole: hole_id,
                column: "blast_id".into(),
            });
        }
        if b.collar != collar {
            return Err(DataError::InconsistentMetadata {
                hole: hole_id,
                column: "collar".into(),
            });
        }
        let depth = require("depth", &hole_id)?;
        if let Some(prev) = b.last_depth {
            let step = depth - prev;
            if step <= 0.0 {
                return Err(DataError::NonMonotonicDepth { hole: hole_id, row });
            }
            if (step - depth_step).abs() > DEPTH_STEP_TOLERANCE * depth_step {
                return Err(DataError::IrregularDepth {
                    hole: hole_id,
                    row,
                    step,
                    expected: depth_step,
                });
            }
        }
        b.last_depth = Some(depth);
        for name in SignalName::ALL {
            let v = require(name.as_str(), &hole_id)?;
            b.signals.get_mut(&name).expect("signal").push(v);
        }
    }
    if let Some(done) = current.take() {
        holes.push(finish_hole(done, depth_step)?);
    }
    Ok(holes)
}

fn finish_hole(b: HoleBuilder, depth_step: f64) -> Result<HoleSignalSet, DataError> {
    HoleSignalSet::new(b.hole_id, b.blast_id, b.collar, depth_step, b.signals)
}

/// Writes holes in the MWD CSV format. Values use the shortest decimal form
/// that round-trips, so `parse(write(h))` reproduces every sample exactly.
pub fn write_mwd_csv(holes: &[HoleSignalSet]) -> String {
    let mut out = String::new();
    out.push_str(&MWD_HEADER.join(","));
    out.push('\n');
    for h in holes {
        for j in 0..h.len() {
            out.push_str(&format!(
                "{},{},{},{}",
                h.hole_id, h.blast_id, h.collar_x, h.collar_y
            ));
            for col in &MWD_HEADER[4..] {
                let name: SignalName = col.parse().expect("header names are signals");
                out.push_str(&format!(",{}", h.signal(name)[j]));
            }
            out.push('\n');
        }
    }
    out
}

/// Parses a labels CSV, accepting material columns from the default registry.
pub fn parse_labels_csv(text: &str) -> Result<Vec<LabelRecord>, DataError> {
    parse_labels_csv_with(text, &MaterialRegistry::default())
}

enum LabelColumn {
    Assay(Assay),
    Material(String),
}

pub fn parse_labels_csv_with(
    text: &str,
    registry: &MaterialRegistry,
) -> Result<Vec<LabelRecord>, DataError> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers()?.clone();
    let mut hole_col = None;
    let mut columns = Vec::new();
    for (i, h) in headers.iter().enumerate() {
        if h == "hole_id" {
            hole_col = Some(i);
        } else if let Ok(a) = h.parse::<Assay>() {
            columns.push((i, LabelColumn::Assay(a)));
        } else if registry.contains(h) {
            columns.push((i, LabelColumn::Material(h.to_string())));
        } else {
            return Err(DataError::UnknownColumn(h.to_string()));
        }
    }
    let hole_col = hole_col.ok_or_else(|| DataError::MissingColumn("hole_id".into()))?;

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let row = row + 1;
        let hole_id = record[hole_col].to_string();
        if !seen.insert(hole_id.clone()) {
            return Err(DataError::DuplicateHole(hole_id));
        }
        let mut label = LabelRecord {
            hole_id: hole_id.clone(),
            ..Default::default()
        };
        for (i, col) in &columns {
            let name = &headers[*i];
            let Some(v) = parse_cell(row, name, &record[*i])? else {
                continue;
            };
            if !v.is_finite() {
                return Err(DataError::NonFiniteSample {
                    hole: hole_id,
                    column: name.to_string(),
                    row,
                });
            }
            match col {
                LabelColumn::Assay(a) => {
                    if v < 0.0 {
                        return Err(DataError::NegativeAssay {
                            hole: hole_id,
                            assay: *a,
                            value: v,
                        });
                    }
                    label.assays.insert(*a, v);
                }
                LabelColumn::Material(code) => {
                    if !(0.0..=100.0).contains(&v) {
                        return Err(DataError::PercentOutOfRange {
                            hole: hole_id,
                            code: code.clone(),
                            value: v,
                        });
                    }
                    label.materials.insert(code.clone(), v);
                }
            }
        }
        if label.has_chemistry() || label.has_materials() {
            out.push(label);
        }
    }
    Ok(out)
}

/// Writes labels with the given column layout; absent values become empty cells.
pub fn write_labels_csv(labels: &[LabelRecord], assays: &[Assay], materials: &[&str]) -> String {
    let mut out = String::from("hole_id");
    for a in assays {
        out.push(',');
        out.push_str(a.as_str());
    }
    for m in materials {
        out.push(',');
        out.push_str(m);
    }
    out.push('\n');
    for l in labels {
        out.push_str(&l.hole_id);
        for a in assays {
            out.push(',');
            if let Some(v) = l.assay(*a) {
                out.push_str(&v.to_string());
            }
        }
        for m in materials {
            out.push(',');
            if let Some(v) = l.material(m) {
                out.push_str(&v.to_string());
            }
        }
        out.push('\n');
    }
    out
}
