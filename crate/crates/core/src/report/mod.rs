//! Report text, CSV tables and SVG plots for evaluation and importance runs.
//!
//! Everything here formats numbers computed elsewhere. The statistics shown
//! in a Bland-Altman annotation and in the report text come from the same
//! [`stat_lines`] call.

mod plots;
mod svg;

use std::fmt::Write;

use serde::Serialize;

use crate::validation::{AgreementStats, EvaluationReport, Outcome};

pub use plots::{
    bland_altman_svg, confusion_svg, histogram_svg, qq_svg, residual_by_grade_svg, CONFUSION_LABELS,
};

/// What every emitted file records about the run that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub seed: u64,
    /// The full run configuration as JSON.
    pub config: String,
}

impl Provenance {
    pub fn new(seed: u64, config: &impl Serialize) -> Self {
        Provenance {
            tool: crate::TOOL_VERSION.to_string(),
            seed,
            config: serde_json::to_string(config).expect("config serializes"),
        }
    }

    /// `# `-prefixed header lines for text and CSV files.
    pub fn header(&self) -> String {
        format!("# tool: {}\n# seed: {}\n# config: {}\n", self.tool, self.seed, self.config)
    }

    pub(crate) fn one_line(&self) -> String {
        format!("tool: {}; seed: {}; config: {}", self.tool, self.seed, self.config)
    }
}

/// Formats a statistic: four decimals, or scientific notation for tiny
/// non-zero magnitudes.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0.0000".to_string()
    } else if v.abs() < 1e-3 {
        format!("{v:.3e}")
    } else {
        format!("{v:.4}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), fmt_num)
}

/// The seven agreement items plus the mean difference, as label/value pairs.
pub fn stat_lines(s: &AgreementStats) -> Vec<(&'static str, String)> {
    let eq = match (s.slope, s.intercept) {
        (Some(m), Some(b)) => {
            let sign = if b < 0.0 { "-" } else { "+" };
            format!("y = {}x {} {}", fmt_num(m), sign, fmt_num(b.abs()))
        }
        _ => "undefined".to_string(),
    };
    vec![
        ("eq", eq),
        ("r", fmt_opt(s.r)),
        ("RMSE", fmt_num(s.rmse)),
        ("p", fmt_opt(s.p)),
        ("n", s.n.to_string()),
        ("RPC", fmt_num(s.rpc)),
        ("CV", s.cv_percent.map_or_else(|| "undefined".to_string(), |c| format!("{}%", fmt_num(c)))),
        ("bias", fmt_num(s.bias)),
    ]
}

/// Plain-text summary of an evaluation.
pub fn report_text(report: &EvaluationReport, prov: &Provenance) -> String {
    let mut out = prov.header();
    let _ = writeln!(out, "target: {}", report.target);
    let _ = writeln!(out, "model: {}", report.model);
    let _ = writeln!(
        out,
        "cv: {} ({} folds, seed {})",
        report.cv_mode.as_str(),
        report.n_folds,
        report.seed
    );
    let _ = writeln!(out, "augment: {}", report.augment.as_deref().unwrap_or("none"));
    match &report.outcome {
        Outcome::Regression {
            stats,
            residual_by_grade,
        } => {
            for (k, v) in stat_lines(stats) {
                let _ = writeln!(out, "{k}: {v}");
            }
            if let Some(groups) = residual_by_grade {
                out.push_str("residual by Fe grade:\n");
                for g in groups {
                    let _ = writeln!(
                        out,
                        "  {}: n={} mean={} sd={}",
                        g.grade.as_str(),
                        g.n,
                        fmt_opt(g.mean),
                        fmt_opt(g.sd)
                    );
                }
            }
        }
        Outcome::Classification { confusion } => {
            let _ = writeln!(out, "n: {}", confusion.n());
            let _ = writeln!(out, "accuracy: {}", fmt_num(confusion.accuracy));
            let _ = writeln!(
                out,
                "confusion (rows true, columns predicted; absent, present):\n  {} {}\n  {} {}",
                confusion.tn, confusion.fp, confusion.fn_, confusion.tp
            );
        }
    }
    out
}

/// Per-hole pooled predictions.
pub fn pairs_csv(report: &EvaluationReport, prov: &Provenance) -> String {
    let mut out = prov.header();
    out.push_str("hole_id,fold,lab,pred\n");
    for i in 0..report.hole_ids.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            report.hole_ids[i], report.folds[i], report.lab[i], report.pred[i]
        );
    }
    out
}

/// The files of one evaluation run, as `(file name, contents)`.
///
/// Regression: `report.txt`, `pairs.csv`, `bland_altman.svg`,
/// `residual_hist.svg`, `qq.svg`, plus `residual_by_grade.svg` for Fe.
/// Classification: `report.txt`, `pairs.csv`, `confusion.svg`.
pub fn evaluation_artifacts(report: &EvaluationReport, prov: &Provenance) -> Vec<(String, String)> {
    let mut files = vec![
        ("report.txt".to_string(), report_text(report, prov)),
        ("pairs.csv".to_string(), pairs_csv(report, prov)),
    ];
    match &report.outcome {
        Outcome::Regression {
            stats,
            residual_by_grade,
        } => {
            let title = format!("{} ({}, {} CV)", report.target, report.model, report.cv_mode.as_str());
            files.push(("bland_altman.svg".into(), bland_altman_svg(report, stats, &title, prov)));
            let residuals = report.residuals();
            files.push((
                "residual_hist.svg".into(),
                histogram_svg(&residuals, 20, &format!("{} residuals (lab - pred)", report.target), prov),
            ));
            files.push((
                "qq.svg".into(),
                qq_svg(&residuals, &format!("{} residuals vs normal", report.target), prov),
            ));
            if let Some(groups) = residual_by_grade {
                files.push(("residual_by_grade.svg".into(), residual_by_grade_svg(groups, prov)));
            }
        }
        Outcome::Classification { confusion } => {
            files.push((
                "confusion.svg".into(),
                confusion_svg(confusion, &format!("{} presence ({})", report.target, report.model), prov),
            ));
        }
    }
    files
}

/// Ranked importance as CSV (`rank,feature,importance`).
pub fn importance_csv(ranked: &[(String, f64)], prov: &Provenance) -> String {
    let mut out = prov.header();
    out.push_str("rank,feature,importance\n");
    for (k, (name, v)) in ranked.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", k + 1, name, v);
    }
    out
}

/// The `top` highest-ranked features as an aligned listing.
pub fn importance_text(ranked: &[(String, f64)], top: usize, prov: &Provenance) -> String {
    let mut out = prov.header();
    let width = ranked.iter().take(top).map(|r| r.0.len()).max().unwrap_or(0);
    for (k, (name, v)) in ranked.iter().take(top).enumerate() {
        let _ = writeln!(out, "{:>3}  {:<width$}  {}", k + 1, name, fmt_num(*v));
    }
    out
}
