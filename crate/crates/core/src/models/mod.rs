//! Predictors trained on feature tables: univariate and multivariate random
//! forests, Gaussian-process regression and a binary RBF support vector
//! machine.
//!
//! Every trained model is wrapped in a [`ModelHandle`] that remembers the
//! digest of the feature names it was trained on and refuses to predict on a
//! table with different columns.

mod forest;
mod gp;
mod svm;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::features::FeatureTable;
use crate::linalg::Matrix;

pub use forest::{train_mvrf, train_rf, Forest, RfParams, Task, Tree, TreeNode};
pub use gp::{
    log_marginal_likelihood, log_marginal_likelihood_grad, train_gp, train_gp_multi,
    train_gp_with, GpGrid, GpModel, GpParams, GridPoint,
};
pub use svm::{train_svm, SvmModel, SvmParams};

/// Version tag written into serialized models.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("need at least {min} training rows, got {got}")]
    TooFewRows { min: usize, got: usize },
    #[error("non-finite value in training data")]
    NonFinite,
    #[error("classification target has a single class")]
    DegenerateTarget,
    #[error("classification labels must be 0/1 (forest) or -1/+1 (svm), got {0}")]
    InvalidLabel(f64),
    #[error("svm training data contains a single class")]
    SingleClass,
    #[error("kernel matrix is not positive definite even with jitter")]
    IllConditionedKernel,
    #[error("feature registry mismatch: model trained on {expected}, input is {found}")]
    RegistryMismatch { expected: String, found: String },
    #[error("{0} requires a random-forest model")]
    WrongModelKind(&'static str),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("model serialization: {0}")]
    Serialization(String),
}

/// Hex SHA-256 of the newline-joined feature names.
pub fn registry_hash(names: &[String]) -> String {
    let mut h = Sha256::new();
    for n in names {
        h.update(n.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Per-feature centering and scaling fitted on training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per column; zero-variance
    /// columns get scale 1.
    pub fn fit(x: &Matrix) -> Standardizer {
        let n = x.nrows().max(1) as f64;
        let p = x.ncols();
        let mut mean = vec![0.0; p];
        for row in x.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; p];
        for row in x.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 && sd.is_finite() {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for r in 0..x.nrows() {
            let row = out.row_mut(r);
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Rf,
    Mvrf,
    Gp,
    Svm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Rf => "rf",
            ModelKind::Mvrf => "mvrf",
            ModelKind::Gp => "gp",
            ModelKind::Svm => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fitted {
    Forest(Forest),
    Gp(GpModel),
    Svm(SvmModel),
}

/// A trained predictor together with the metadata needed to reuse it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHandle {
    pub format_version: u32,
    pub kind: ModelKind,
    pub registry_hash: String,
    pub feature_names: Vec<String>,
    pub seed: u64,
    pub fitted: Fitted,
}

/// Model outputs: one vector per target, plus predictive variance for GPs.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub outputs: Vec<Vec<f64>>,
    pub variance: Option<Vec<Vec<f64>>>,
}

impl Predictions {
    /// Predictions of the first (usually only) target.
    pub fn values(&self) -> &[f64] {
        &self.outputs[0]
    }
}

pub(crate) fn check_training(x: &Matrix, n_targets: usize, min_rows: usize) -> Result<(), ModelError> {
    if x.nrows() < min_rows {
        return Err(ModelError::TooFewRows {
            min: min_rows,
            got: x.nrows(),
        });
    }
    if x.nrows() != n_targets {
        return Err(ModelError::Dimension(format!(
            "{} rows but {} targets",
            x.nrows(),
            n_targets
        )));
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(ModelError::NonFinite);
    }
    Ok(())
}

impl ModelHandle {
    pub(crate) fn new(kind: ModelKind, table: &FeatureTable, seed: u64, fitted: Fitted) -> Self {
        ModelHandle {
            format_version: MODEL_FORMAT_VERSION,
            kind,
            registry_hash: table.registry_hash(),
            feature_names: table.names.clone(),
            seed,
            fitted,
        }
    }

    /// Predicts every row of `table`, which must carry the training columns.
    pub fn predict(&self, table: &FeatureTable) -> Result<Predictions, ModelError> {
        let found = table.registry_hash();
        if found != self.registry_hash {
            return Err(ModelError::RegistryMismatch {
                expected: self.registry_hash.clone(),
                found,
            });
        }
        if table.data.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite);
        }
        Ok(match &self.fitted {
            Fitted::Forest(f) => Predictions {
                outputs: f.predict(&table.data),
                variance: None,
            },
            Fitted::Gp(g) => {
                let (mean, var) = g.predict(&table.data);
                Predictions {
                    outputs: mean,
                    variance: Some(var),
                }
            }
            Fitted::Svm(s) => Predictions {
                outputs: vec![s.predict(&table.data)],
                variance: None,
            },
        })
    }

    /// Normalized impurity-decrease importance per feature, descending;
    /// ties keep registry order.
    pub fn feature_importance(&self) -> Result<Vec<(String, f64)>, ModelError> {
        let Fitted::Forest(f) = &self.fitted else {
            return Err(ModelError::WrongModelKind("feature importance"));
        };
        let raw = f.importance_raw();
        let total: f64 = raw.iter().sum();
        let mut ranked: Vec<(String, f64)> = self
            .feature_names
            .iter()
            .cloned()
            .zip(raw.iter().map(|v| if total > 0.0 { v / total } else { 0.0 }))
            .collect();
        // stable sort keeps registry order among equal importances
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
        Ok(ranked)
    }

    pub fn to_json(&self) -> Result<String, ModelError> {
        serde_json::to_string(self).map_err(|e| ModelError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ModelHandle, ModelError> {
        let m: ModelHandle =
            serde_json::from_str(text).map_err(|e| ModelError::Serialization(e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Serialization(format!(
                "unsupported model format version {}",
                m.format_version
            )));
        }
        Ok(m)
    }
}

/// Importance ranking of a forest model.
pub fn rf_feature_importance(model: &ModelHandle) -> Result<Vec<(String, f64)>, ModelError> {
    model.feature_importance()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizer_uses_training_statistics() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0]]);
        let s = Standardizer::fit(&x);
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        assert_eq!(s.transform_row(&[4.0, 7.0]), vec![2.0, 2.0]);
    }

    #[test]
    fn registry_hash_depends_on_order() {
        let a = registry_hash(&["x".into(), "y".into()]);
        let b = registry_hash(&["y".into(), "x".into()]);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }
}
