use serde::{Deserialize, Serialize};

use super::ValidationError;
use crate::datamodel::LabelRecord;

/// Iron grade class: waste below 50 %, medium up to 60 %, high from 60 %.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeGrade {
    Waste,
    Med,
    High,
}

impl FeGrade {
    pub const ALL: [FeGrade; 3] = [FeGrade::Waste, FeGrade::Med, FeGrade::High];

    pub fn as_str(self) -> &'static str {
        match self {
            FeGrade::Waste => "waste",
            FeGrade::Med => "med",
            FeGrade::High => "high",
        }
    }
}

pub fn fe_grade_class(fe: f64) -> FeGrade {
    if fe < 50.0 {
        FeGrade::Waste
    } else if fe < 60.0 {
        FeGrade::Med
    } else {
        FeGrade::High
    }
}

/// A material is present when its logged percentage is strictly above the
/// threshold.
pub fn materialize_presence(label: &LabelRecord, code: &str, threshold: f64) -> Result<bool, ValidationError> {
    label
        .material(code)
        .map(|pct| pct > threshold)
        .ok_or_else(|| ValidationError::CodeMissing(code.to_string()))
}

/// Binary confusion counts; "positive" means the material exists.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix2 {
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tp: usize,
    pub accuracy: f64,
}

impl ConfusionMatrix2 {
    pub fn n(&self) -> usize {
        self.tn + self.fp + self.fn_ + self.tp
    }
}

pub fn confusion(pred: &[bool], truth: &[bool]) -> Result<ConfusionMatrix2, ValidationError> {
    if pred.len() != truth.len() {
        return Err(ValidationError::LengthMismatch(pred.len(), truth.len()));
    }
    let (mut tn, mut fp, mut fn_, mut tp) = (0, 0, 0, 0);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p, t) {
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (true, true) => tp += 1,
        }
    }
    let n = pred.len();
    let accuracy = if n == 0 { f64::NAN } else { (tn + tp) as f64 / n as f64 };
    Ok(ConfusionMatrix2 {
        tn,
        fp,
        fn_,
        tp,
        accuracy,
    })
}
