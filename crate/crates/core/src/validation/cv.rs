use serde::{Deserialize, Serialize};

use super::classes::{confusion, fe_grade_class, materialize_presence, ConfusionMatrix2, FeGrade};
use super::folds::{FoldMode, FoldPlan};
use super::stats::{bland_altman, AgreementStats};
use super::ValidationError;
use crate::datamodel::{Assay, Dataset, LabelRecord};
use crate::features::{extract_features, FeatureConfig, FeatureError, FeatureTable};
use crate::models::{
    train_gp, train_gp_multi, train_mvrf, train_rf, train_svm, GpGrid, ModelHandle, ModelKind, RfParams,
    SvmParams, Task,
};

/// What a cross-validation run predicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Assay(Assay),
    /// Several assays predicted jointly (mvRF, multi-output GP) or one by one.
    Assays(Vec<Assay>),
    /// Presence of a logged material: percentage strictly above `threshold`.
    Material { code: String, threshold: f64 },
}

impl Target {
    pub fn task(&self) -> Task {
        match self {
            Target::Material { .. } => Task::Classification,
            _ => Task::Regression,
        }
    }

    pub fn names(&self) -> Vec<String> {
        match self {
            Target::Assay(a) => vec![a.as_str().to_string()],
            Target::Assays(v) => v.iter().map(|a| a.as_str().to_string()).collect(),
            Target::Material { code, .. } => vec![code.clone()],
        }
    }

    fn assays(&self) -> Vec<Assay> {
        match self {
            Target::Assay(a) => vec![*a],
            Target::Assays(v) => v.clone(),
            Target::Material { .. } => Vec::new(),
        }
    }

    /// Target values of one hole, or `None` if any is missing.
    pub fn values(&self, label: &LabelRecord) -> Option<Vec<f64>> {
        match self {
            Target::Material { code, threshold } => materialize_presence(label, code, *threshold)
                .ok()
                .map(|p| vec![if p { 1.0 } else { 0.0 }]),
            _ => self.assays().into_iter().map(|a| label.assay(a)).collect(),
        }
    }
}

/// Anything that can be trained on one fold and predict another.
///
/// `ys[k]` holds target `k` for every training row; the result holds one
/// prediction vector per target. Classification targets are 0/1.
pub trait Learner {
    fn name(&self) -> String;

    fn fit_predict(
        &self,
        train: &FeatureTable,
        ys: &[Vec<f64>],
        test: &FeatureTable,
        task: Task,
    ) -> Result<Vec<Vec<f64>>, ValidationError>;
}

/// The models shipped with the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    Rf(RfParams),
    Mvrf(RfParams),
    Gp(GpGrid),
    Svm(SvmParams),
}

impl ModelSpec {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::Rf(_) => ModelKind::Rf,
            ModelSpec::Mvrf(_) => ModelKind::Mvrf,
            ModelSpec::Gp(_) => ModelKind::Gp,
            ModelSpec::Svm(_) => ModelKind::Svm,
        }
    }

    /// Trains one model per target except for the jointly trained kinds
    /// (mvRF, GP with several targets), which return a single handle.
    pub fn fit(&self, train: &FeatureTable, ys: &[Vec<f64>], task: Task) -> Result<Vec<ModelHandle>, ValidationError> {
        let unsupported = || ValidationError::UnsupportedTarget(self.kind().as_str().to_string());
        match (self, task) {
            (ModelSpec::Rf(p), _) => ys.iter().map(|y| Ok(train_rf(train, y, p, task)?)).collect(),
            (ModelSpec::Mvrf(p), Task::Regression) => Ok(vec![train_mvrf(train, ys, p)?]),
            (ModelSpec::Gp(g), Task::Regression) if ys.len() == 1 => Ok(vec![train_gp(train, &ys[0], g)?]),
            (ModelSpec::Gp(g), Task::Regression) => Ok(vec![train_gp_multi(train, ys, g)?]),
            (ModelSpec::Svm(p), Task::Classification) => ys
                .iter()
                .map(|y| {
                    let pm: Vec<f64> = y.iter().map(|v| if *v > 0.5 { 1.0 } else { -1.0 }).collect();
                    Ok(train_svm(train, &pm, p)?)
                })
                .collect(),
            _ => Err(unsupported()),
        }
    }
}

impl Learner for ModelSpec {
    fn name(&self) -> String {
        self.kind().as_str().to_string()
    }

    fn fit_predict(
        &self,
        train: &FeatureTable,
        ys: &[Vec<f64>],
        test: &FeatureTable,
        task: Task,
    ) -> Result<Vec<Vec<f64>>, ValidationError> {
        // a fold whose training part holds one class predicts that class
        if task == Task::Classification && ys.iter().all(|y| y.iter().all(|v| *v == y[0])) {
            return Ok(ys.iter().map(|y| vec![y[0]; test.len()]).collect());
        }
        let mut out = Vec::with_capacity(ys.len());
        for handle in self.fit(train, ys, task)? {
            let mut pred = handle.predict(test)?.outputs;
            if handle.kind == ModelKind::Svm {
                for v in pred.iter_mut().flatten() {
                    *v = if *v > 0.0 { 1.0 } else { 0.0 };
                }
            }
            out.extend(pred);
        }
        Ok(out)
    }
}

/// Features, blast membership and labels of the holes under evaluation,
/// row-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub table: FeatureTable,
    pub blast_ids: Vec<String>,
    pub labels: Vec<Option<LabelRecord>>,
}

impl ExperimentData {
    pub fn new(table: FeatureTable, blast_ids: Vec<String>, labels: Vec<Option<LabelRecord>>) -> Self {
        assert_eq!(table.len(), blast_ids.len(), "blast ids per row");
        assert_eq!(table.len(), labels.len(), "labels per row");
        ExperimentData {
            table,
            blast_ids,
            labels,
        }
    }

    pub fn from_dataset(dataset: &Dataset, cfg: &FeatureConfig) -> Result<Self, FeatureError> {
        let table = extract_features(dataset.signal_sets(), cfg)?;
        let blast_ids = dataset.signal_sets().map(|h| h.blast_id.clone()).collect();
        let labels = dataset.labels().map(|l| l.cloned()).collect();
        Ok(ExperimentData::new(table, blast_ids, labels))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Keeps the holes that have every target value and the augment assay.
    pub fn restrict(&self, target: &Target, augment: Option<Assay>) -> ExperimentData {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                self.labels[i].as_ref().is_some_and(|l| {
                    target.values(l).is_some() && augment.is_none_or(|a| l.assay(a).is_some())
                })
            })
            .collect();
        ExperimentData {
            table: self.table.select(&keep),
            blast_ids: keep.iter().map(|&i| self.blast_ids[i].clone()).collect(),
            labels: keep.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// `(hole_id, blast_id)` pairs in row order, the input of `make_folds`.
    pub fn fold_keys(&self) -> Vec<(String, String)> {
        self.table
            .hole_ids
            .iter()
            .cloned()
            .zip(self.blast_ids.iter().cloned())
            .collect()
    }
}

/// Residual summary (lab − pred) of the holes in one iron grade class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeResiduals {
    pub grade: FeGrade,
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Outcome {
    Regression {
        stats: AgreementStats,
        /// Present when the target is Fe.
        residual_by_grade: Option<Vec<GradeResiduals>>,
    },
    Classification {
        confusion: ConfusionMatrix2,
    },
}

/// Pooled out-of-fold predictions of one target and their summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub target: String,
    pub model: String,
    pub cv_mode: FoldMode,
    pub n_folds: usize,
    pub seed: u64,
    pub augment: Option<String>,
    pub hole_ids: Vec<String>,
    pub folds: Vec<usize>,
    pub lab: Vec<f64>,
    pub pred: Vec<f64>,
    pub outcome: Outcome,
}

impl EvaluationReport {
    pub fn stats(&self) -> Option<&AgreementStats> {
        match &self.outcome {
            Outcome::Regression { stats, .. } => Some(stats),
            Outcome::Classification { .. } => None,
        }
    }

    pub fn confusion(&self) -> Option<&ConfusionMatrix2> {
        match &self.outcome {
            Outcome::Classification { confusion } => Some(confusion),
            Outcome::Regression { .. } => None,
        }
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.lab.iter().zip(&self.pred).map(|(l, p)| l - p).collect()
    }
}

fn grade_residuals(lab: &[f64], pred: &[f64]) -> Vec<GradeResiduals> {
    FeGrade::ALL
        .iter()
        .map(|&grade| {
            let residuals: Vec<f64> = lab
                .iter()
                .zip(pred)
                .filter(|(l, _)| fe_grade_class(**l) == grade)
                .map(|(l, p)| l - p)
                .collect();
            let n = residuals.len();
            let mean = (n > 0).then(|| residuals.iter().sum::<f64>() / n as f64);
            let sd = mean.filter(|_| n > 1).map(|m| {
                (residuals.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / (n - 1) as f64).sqrt()
            });
            GradeResiduals {
                grade,
                n,
                mean,
                sd,
                residuals,
            }
        })
        .collect()
}

struct Prepared {
    table: FeatureTable,
    ys: Vec<Vec<f64>>,
}

fn prepare(
    data: &ExperimentData,
    target: &Target,
    plan: &FoldPlan,
    augment: Option<Assay>,
) -> Result<Prepared, ValidationError> {
    if let Some(a) = augment {
        if target.assays().contains(&a) {
            return Err(ValidationError::AugmentEqualsTarget(a.as_str().to_string()));
        }
    }
    if plan.hole_ids != data.table.hole_ids {
        return Err(ValidationError::PlanMismatch(format!(
            "{} planned holes, {} rows",
            plan.hole_ids.len(),
            data.len()
        )));
    }
    let q = target.names().len();
    let mut ys = vec![Vec::with_capacity(data.len()); q];
    let mut aug = Vec::with_capacity(data.len());
    for (i, hole) in data.table.hole_ids.iter().enumerate() {
        let missing = |t: String| ValidationError::MissingTarget {
            hole: hole.clone(),
            target: t,
        };
        let label = data.labels[i].as_ref();
        let vals = label
            .and_then(|l| target.values(l))
            .ok_or_else(|| missing(target.names().join(",")))?;
        for (k, v) in vals.into_iter().enumerate() {
            ys[k].push(v);
        }
        if let Some(a) = augment {
            aug.push(label.and_then(|l| l.assay(a)).ok_or_else(|| missing(a.as_str().to_string()))?);
        }
    }
    let table = match augment {
        Some(a) => data.table.with_column(&format!("lab__{}", a.as_str()), &aug),
        None => data.table.clone(),
    };
    Ok(Prepared { table, ys })
}

fn select_targets(ys: &[Vec<f64>], rows: &[usize]) -> Vec<Vec<f64>> {
    ys.iter().map(|y| rows.iter().map(|&i| y[i]).collect()).collect()
}

/// Runs cross-validation and returns one report per target, in target order.
///
/// Every hole must carry the target (and the augment assay, which is added
/// as a `lab__<assay>` feature column). Each fold's model sees only its
/// training rows.
pub fn run_cv_multi(
    data: &ExperimentData,
    target: &Target,
    learner: &dyn Learner,
    plan: &FoldPlan,
    augment: Option<Assay>,
) -> Result<Vec<EvaluationReport>, ValidationError> {
    let prep = prepare(data, target, plan, augment)?;
    let task = target.task();
    let n = data.len();
    let q = prep.ys.len();
    let mut pred = vec![vec![f64::NAN; n]; q];
    for fold in 0..plan.k {
        let test = plan.test_indices(fold);
        if test.is_empty() {
            continue;
        }
        let train = plan.train_indices(fold);
        let out = learner.fit_predict(
            &prep.table.select(&train),
            &select_targets(&prep.ys, &train),
            &prep.table.select(&test),
            task,
        )?;
        if out.len() != q || out.iter().any(|o| o.len() != test.len()) {
            return Err(ValidationError::LengthMismatch(out.len(), q));
        }
        for (k, o) in out.into_iter().enumerate() {
            for (&i, v) in test.iter().zip(o) {
                pred[k][i] = v;
            }
        }
    }
    let names = target.names();
    let mut reports = Vec::with_capacity(q);
    for (k, (lab, pred)) in prep.ys.into_iter().zip(pred).enumerate() {
        let outcome = match task {
            Task::Regression => Outcome::Regression {
                stats: bland_altman(&lab, &pred)?,
                residual_by_grade: (names[k] == Assay::Fe.as_str()).then(|| grade_residuals(&lab, &pred)),
            },
            Task::Classification => {
                let p: Vec<bool> = pred.iter().map(|v| *v > 0.5).collect();
                let t: Vec<bool> = lab.iter().map(|v| *v > 0.5).collect();
                Outcome::Classification {
                    confusion: confusion(&p, &t)?,
                }
            }
        };
        reports.push(EvaluationReport {
            target: names[k].clone(),
            model: learner.name(),
            cv_mode: plan.mode,
            n_folds: plan.k,
            seed: plan.seed,
            augment: augment.map(|a| a.as_str().to_string()),
            hole_ids: data.table.hole_ids.clone(),
            folds: plan.assignments.clone(),
            lab,
            pred,
            outcome,
        });
    }
    Ok(reports)
}

/// Cross-validation of a single target.
pub fn run_cv(
    data: &ExperimentData,
    target: &Target,
    learner: &dyn Learner,
    plan: &FoldPlan,
    augment: Option<Assay>,
) -> Result<EvaluationReport, ValidationError> {
    if target.names().len() != 1 {
        return Err(ValidationError::UnsupportedTarget(
            "run_cv with several targets; use run_cv_multi".into(),
        ));
    }
    Ok(run_cv_multi(data, target, learner, plan, augment)?.remove(0))
}

/// The model(s) that `run_cv` trains for one fold, for inspection.
pub fn fold_model(
    data: &ExperimentData,
    target: &Target,
    spec: &ModelSpec,
    plan: &FoldPlan,
    fold: usize,
    augment: Option<Assay>,
) -> Result<Vec<ModelHandle>, ValidationError> {
    let prep = prepare(data, target, plan, augment)?;
    let train = plan.train_indices(fold);
    spec.fit(&prep.table.select(&train), &select_targets(&prep.ys, &train), target.task())
}
