//! Cross-validation plans, agreement statistics and evaluation reports.

mod classes;
mod cv;
mod folds;
mod stats;

use thiserror::Error;

use crate::models::ModelError;

pub use classes::{confusion, fe_grade_class, materialize_presence, ConfusionMatrix2, FeGrade};
pub use cv::{
    fold_model, run_cv, run_cv_multi, EvaluationReport, ExperimentData, GradeResiduals, Learner,
    ModelSpec, Outcome, Target,
};
pub use folds::{make_folds, FoldMode, FoldPlan};
pub use stats::{
    bland_altman, histogram, linear_fit, pearson_p, pearson_r, qq_points, rmse, AgreementStats,
    HistogramBin, QqReference,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("input is constant")]
    ConstantInput,
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need k >= 2 and at least k holes (k = {k}, holes = {n})")]
    TooFewHoles { k: usize, n: usize },
    #[error("spatial cross-validation needs at least two blasts, found {0}")]
    TooFewBlasts(usize),
    #[error("hole `{hole}` has no value for target {target}")]
    MissingTarget { hole: String, target: String },
    #[error("augment assay {0} is also the target")]
    AugmentEqualsTarget(String),
    #[error("material {0} not logged for this hole")]
    CodeMissing(String),
    #[error("fold plan does not match the data: {0}")]
    PlanMismatch(String),
    #[error("{0} does not support this target")]
    UnsupportedTarget(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
