// SPDX-License-Identifier: MIT OR Apache-2.0

//! Minimal self-contained SVG line charts.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub struct Plot {
    title: String,
    x: (f64, f64),
    y: (f64, f64),
    body: String,
    legend: Vec<(String, String, &'static str)>,
}

impl Plot {
    /// Axes spanning every value in `xs` and `ys` (non-finite values are
    /// ignored).
    pub fn new(title: &str, xs: &[f64], ys: &[f64]) -> Self {
        let x = range(xs);
        let mut y = range(ys);
        let pad = 0.05 * (y.1 - y.0);
        y = (y.0 - pad, y.1 + pad);
        Self {
            title: title.to_string(),
            x,
            y,
            body: String::new(),
            legend: Vec::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn path(&self, xs: &[f64], ys: &[f64]) -> String {
        let mut d = String::new();
        for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { 'M' } else { 'L' }, self.px(x), self.py(y));
        }
        d
    }

    pub fn points(&mut self, label: &str, xs: &[f64], ys: &[f64], color: &str) {
        for (&x, &y) in xs.iter().zip(ys) {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.2" fill="{color}" fill-opacity="0.6"/>"#,
                self.px(x),
                self.py(y)
            );
        }
        self.legend.push((label.into(), color.into(), "dot"));
    }

    pub fn line(&mut self, label: &str, xs: &[f64], ys: &[f64], color: &str, dash: Option<&str>) {
        let dash = dash.map_or(String::new(), |d| format!(r#" stroke-dasharray="{d}""#));
        let _ = writeln!(
            self.body,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"{dash}/>"#,
            self.path(xs, ys)
        );
        self.legend.push((label.into(), color.into(), "line"));
    }

    pub fn band(&mut self, label: &str, xs: &[f64], lo: &[f64], hi: &[f64], color: &str) {
        let mut d = self.path(xs, hi);
        for (&x, &y) in xs.iter().zip(lo).rev() {
            let _ = write!(d, "L{:.2},{:.2} ", self.px(x), self.py(y));
        }
        let _ = writeln!(self.body, r#"<path d="{d}Z" fill="{color}" fill-opacity="0.25" stroke="none"/>"#);
        self.legend.push((label.into(), color.into(), "box"));
    }

    pub fn bars(&mut self, label: &str, xs: &[f64], ys: &[f64], color: &str) {
        let w = if xs.len() > 1 {
            0.8 * (self.px(xs[1]) - self.px(xs[0])).abs()
        } else {
            4.0
        };
        let base = self.py(self.y.0.max(0.0));
        for (&x, &y) in xs.iter().zip(ys) {
            let top = self.py(y);
            let _ = writeln!(
                self.body,
                r#"<rect x="{:.2}" y="{:.2}" width="{w:.2}" height="{:.2}" fill="{color}"/>"#,
                self.px(x) - w / 2.0,
                top.min(base),
                (base - top).abs()
            );
        }
        self.legend.push((label.into(), color.into(), "box"));
    }

    pub fn vlines(&mut self, label: &str, xs: &[f64], color: &str) {
        for &x in xs {
            let _ = writeln!(
                self.body,
                r#"<line x1="{0:.2}" x2="{0:.2}" y1="{1:.2}" y2="{2:.2}" stroke="{color}" stroke-dasharray="6 4"/>"#,
                self.px(x),
                MARGIN,
                HEIGHT - MARGIN
            );
        }
        if !xs.is_empty() {
            self.legend.push((label.into(), color.into(), "line"));
        }
    }

    pub fn finish(self, x_label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
        let _ = writeln!(
            s,
            r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
        );
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#,
                self.px(xv),
                y0 + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                self.py(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            escape(x_label)
        );
        s.push_str(&self.body);
        for (i, (label, color, kind)) in self.legend.iter().enumerate() {
            let y = MARGIN + 8.0 + 16.0 * i as f64;
            let mark = match *kind {
                "dot" => format!(r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#, x1 - 150.0, y - 4.0),
                "box" => format!(
                    r#"<rect x="{}" y="{}" width="12" height="8" fill="{color}" fill-opacity="0.5"/>"#,
                    x1 - 156.0,
                    y - 8.0
                ),
                _ => format!(
                    r#"<line x1="{}" x2="{}" y1="{2}" y2="{2}" stroke="{color}" stroke-width="2"/>"#,
                    x1 - 158.0,
                    x1 - 142.0,
                    y - 4.0
                ),
            };
            let _ = writeln!(s, "{mark}<text x=\"{}\" y=\"{y}\">{}</text>", x1 - 136.0, escape(label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn range(v: &[f64]) -> (f64, f64) {
    let (lo, hi) = v
        .iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 1000.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
