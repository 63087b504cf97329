//! A minimal SVG writer. Output depends only on the inputs, and numbers are
//! printed with fixed precision so files diff cleanly.

use std::fmt::Write;

pub(crate) fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub(crate) struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn comment(&mut self, text: &str) {
        // "--" is not allowed inside XML comments
        let _ = writeln!(self.body, "<!-- {} -->", text.replace("--", "- -"));
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dashed: bool) {
        let dash = if dashed { " stroke-dasharray=\"4 3\"" } else { "" };
        let _ = writeln!(
            self.body,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{stroke}\" stroke-width=\"1\"{dash}/>"
        );
    }

    pub fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.1}\" fill=\"{fill}\" fill-opacity=\"0.6\"/>"
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        let _ = writeln!(
            self.body,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\" stroke=\"{stroke}\"/>"
        );
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str, size: f64, anchor: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"{size:.0}\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

/// Data-to-pixel mapping of one panel.
pub(crate) struct Axes {
    pub left: f64,
    pub top: f64,
    pub width: f64,
    pub height: f64,
    pub x: (f64, f64),
    pub y: (f64, f64),
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

pub(crate) fn range<'a>(values: impl IntoIterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    padded(lo, hi)
}

impl Axes {
    pub fn px(&self, v: f64) -> f64 {
        self.left + (v - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    pub fn py(&self, v: f64) -> f64 {
        self.top + self.height - (v - self.y.0) / (self.y.1 - self.y.0) * self.height
    }

    pub fn draw(&self, svg: &mut Svg, title: &str, xlabel: &str, ylabel: &str) {
        svg.rect(self.left, self.top, self.width, self.height, "none", "#333");
        svg.text(self.left + self.width / 2.0, self.top - 10.0, title, 14.0, "middle");
        svg.text(
            self.left + self.width / 2.0,
            self.top + self.height + 36.0,
            xlabel,
            12.0,
            "middle",
        );
        svg.text(self.left - 48.0, self.top + self.height / 2.0, ylabel, 12.0, "middle");
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (x, y) = (self.px(xv), self.py(yv));
            let bottom = self.top + self.height;
            svg.line(x, bottom, x, bottom + 4.0, "#333", false);
            svg.text(x, bottom + 16.0, &tick(xv), 10.0, "middle");
            svg.line(self.left - 4.0, y, self.left, y, "#333", false);
            svg.text(self.left - 6.0, y + 3.0, &tick(yv), 10.0, "end");
        }
    }

    /// Line across the panel, clipped to the y range by sampling its ends.
    pub fn hline(&self, svg: &mut Svg, y: f64, stroke: &str, dashed: bool) {
        if y >= self.y.0 && y <= self.y.1 {
            svg.line(self.left, self.py(y), self.left + self.width, self.py(y), stroke, dashed);
        }
    }

    pub fn segment(&self, svg: &mut Svg, a: (f64, f64), b: (f64, f64), stroke: &str, dashed: bool) {
        svg.line(self.px(a.0), self.py(a.1), self.px(b.0), self.py(b.1), stroke, dashed);
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e5) {
        format!("{v:.2}")
    } else {
        format!("{v:.1e}")
    }
}
