use super::svg::{range, Axes, Svg};
use super::{fmt_num, stat_lines, Provenance};
use crate::validation::{
    histogram, qq_points, AgreementStats, ConfusionMatrix2, EvaluationReport, GradeResiduals, QqReference,
};

/// Axis labels of the confusion matrix, absent class first.
pub const CONFUSION_LABELS: [&str; 2] = ["1 - Material does not exist", "2 - Material exist"];

const POINT: &str = "#1f5fa8";
const FIT: &str = "#c0392b";
const GUIDE: &str = "#777";

fn panel(left: f64, x: (f64, f64), y: (f64, f64)) -> Axes {
    Axes {
        left,
        top: 50.0,
        width: 340.0,
        height: 320.0,
        x,
        y,
    }
}

/// Regression scatter (lab vs predicted, with the fitted line) next to the
/// Bland-Altman plot (mean of each pair vs lab − pred, with the mean
/// difference and ±RPC), annotated with [`stat_lines`].
pub fn bland_altman_svg(report: &EvaluationReport, stats: &AgreementStats, title: &str, prov: &Provenance) -> String {
    let mut svg = Svg::new(1040.0, 440.0);
    svg.comment(&prov.one_line());
    svg.text(520.0, 20.0, title, 16.0, "middle");

    let both = range(report.lab.iter().chain(&report.pred));
    let a = panel(70.0, both, both);
    a.draw(&mut svg, "Regression", "lab", "predicted");
    a.segment(&mut svg, (both.0, both.0), (both.1, both.1), GUIDE, true);
    for (l, p) in report.lab.iter().zip(&report.pred) {
        svg.circle(a.px(*l), a.py(*p), 2.5, POINT);
    }
    if let (Some(m), Some(b)) = (stats.slope, stats.intercept) {
        let (x0, x1) = range(&report.lab);
        a.segment(&mut svg, (x0, m * x0 + b), (x1, m * x1 + b), FIT, false);
    }

    let lo = stats.bias - stats.rpc;
    let hi = stats.bias + stats.rpc;
    let diffs: Vec<f64> = stats.ba_pairs.iter().map(|p| p.1).chain([lo, hi]).collect();
    let b = panel(500.0, range(stats.ba_pairs.iter().map(|p| &p.0)), range(&diffs));
    b.draw(&mut svg, "Bland-Altman", "mean of lab and predicted", "lab - predicted");
    for (m, d) in &stats.ba_pairs {
        svg.circle(b.px(*m), b.py(*d), 2.5, POINT);
    }
    b.hline(&mut svg, stats.bias, FIT, false);
    b.hline(&mut svg, lo, GUIDE, true);
    b.hline(&mut svg, hi, GUIDE, true);

    for (k, (label, value)) in stat_lines(stats).into_iter().enumerate() {
        svg.text(860.0, 70.0 + 20.0 * k as f64, &format!("{label}: {value}"), 12.0, "start");
    }
    svg.finish()
}

pub fn histogram_svg(values: &[f64], bins: usize, title: &str, prov: &Provenance) -> String {
    let mut svg = Svg::new(480.0, 440.0);
    svg.comment(&prov.one_line());
    let h = histogram(values, bins);
    let x = match (h.first(), h.last()) {
        (Some(f), Some(l)) => (f.lo, l.hi),
        _ => (0.0, 1.0),
    };
    let top = h.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;
    let a = panel(80.0, x, (0.0, top * 1.05));
    a.draw(&mut svg, title, "value", "count");
    for b in &h {
        let (x0, x1) = (a.px(b.lo), a.px(b.hi));
        let (y0, y1) = (a.py(b.count as f64), a.py(0.0));
        svg.rect(x0, y0, x1 - x0, y1 - y0, POINT, "white");
    }
    svg.finish()
}

/// Sample quantiles against a normal with the sample's mean and SD.
pub fn qq_svg(values: &[f64], title: &str, prov: &Provenance) -> String {
    let mut svg = Svg::new(480.0, 440.0);
    svg.comment(&prov.one_line());
    let pts = qq_points(values, QqReference::Normal).unwrap_or_default();
    let r = range(pts.iter().flat_map(|p| [&p.0, &p.1]));
    let a = panel(80.0, r, r);
    a.draw(&mut svg, title, "normal quantile", "sample quantile");
    a.segment(&mut svg, (r.0, r.0), (r.1, r.1), GUIDE, true);
    for (t, s) in &pts {
        svg.circle(a.px(*t), a.py(*s), 2.5, POINT);
    }
    svg.finish()
}

/// Residuals (lab − pred) per iron grade class, with each class mean.
pub fn residual_by_grade_svg(groups: &[GradeResiduals], prov: &Provenance) -> String {
    let mut svg = Svg::new(480.0, 440.0);
    svg.comment(&prov.one_line());
    let y = range(groups.iter().flat_map(|g| g.residuals.iter()));
    let a = panel(80.0, (0.0, groups.len() as f64), y);
    a.draw(&mut svg, "Fe residuals by grade", "", "lab - predicted");
    a.hline(&mut svg, 0.0, GUIDE, true);
    for (k, g) in groups.iter().enumerate() {
        let centre = k as f64 + 0.5;
        svg.text(
            a.px(centre),
            a.top + a.height + 36.0,
            &format!("{} (n={})", g.grade.as_str(), g.n),
            12.0,
            "middle",
        );
        let m = g.residuals.len().max(1) as f64;
        for (i, r) in g.residuals.iter().enumerate() {
            // spread points evenly across the strip
            let dx = 0.6 * ((i as f64 + 0.5) / m - 0.5);
            svg.circle(a.px(centre + dx), a.py(*r), 2.0, POINT);
        }
        if let Some(mean) = g.mean {
            a.segment(&mut svg, (centre - 0.35, mean), (centre + 0.35, mean), FIT, false);
        }
    }
    svg.finish()
}

/// 2×2 confusion matrix; rows are the true class, columns the predicted one.
pub fn confusion_svg(c: &ConfusionMatrix2, title: &str, prov: &Provenance) -> String {
    let mut svg = Svg::new(560.0, 440.0);
    svg.comment(&prov.one_line());
    svg.text(300.0, 30.0, title, 16.0, "middle");
    let (left, top, cell) = (200.0, 80.0, 140.0);
    let counts = [[c.tn, c.fp], [c.fn_, c.tp]];
    let n = c.n().max(1) as f64;
    for (r, row) in counts.iter().enumerate() {
        for (col, &v) in row.iter().enumerate() {
            let x = left + col as f64 * cell;
            let y = top + r as f64 * cell;
            let shade = 255.0 - 180.0 * v as f64 / n;
            let fill = format!("rgb({0:.0},{0:.0},255)", shade);
            svg.rect(x, y, cell, cell, &fill, "#333");
            svg.text(x + cell / 2.0, y + cell / 2.0, &v.to_string(), 20.0, "middle");
            svg.text(
                x + cell / 2.0,
                y + cell / 2.0 + 20.0,
                &format!("{}%", fmt_num(100.0 * v as f64 / n)),
                11.0,
                "middle",
            );
        }
    }
    for (k, label) in CONFUSION_LABELS.iter().enumerate() {
        svg.text(left + (k as f64 + 0.5) * cell, top + 2.0 * cell + 22.0, label, 11.0, "middle");
        svg.text(left - 8.0, top + (k as f64 + 0.5) * cell, label, 11.0, "end");
    }
    svg.text(left + cell, top + 2.0 * cell + 44.0, "Predicted", 12.0, "middle");
    svg.text(left - 8.0, top - 12.0, "True", 12.0, "end");
    svg.text(
        left + cell,
        top + 2.0 * cell + 64.0,
        &format!("accuracy: {}", fmt_num(c.accuracy)),
        12.0,
        "middle",
    );
    svg.finish()
}
