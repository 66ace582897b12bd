//! Deterministic CSV tables and SVG line charts for reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::constants::gradient_constants;
use crate::error::{Error, Result};
use crate::geometry::{CurvatureSample, ManifoldSpec};
use crate::spectral::EigenResult;
use crate::verify::VerificationRecord;

/// Chart width and height in SVG user units.
pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
/// Ticks per axis.
pub const TICKS: usize = 5;

/// An `(x, y)` series with axis labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{}\n", csv_field(&self.x_label), csv_field(&self.y_label));
        for (x, y) in &self.points {
            let _ = writeln!(out, "{},{}", num(*x), num(*y));
        }
        out
    }
}

/// Plots derived from sweep records or closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    SharpnessVsAspect,
    KbarVsLambda1,
    AlphaVsDelta,
}

impl PlotKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SharpnessVsAspect => "sharpness-vs-aspect",
            Self::KbarVsLambda1 => "kbar-vs-lambda1",
            Self::AlphaVsDelta => "alpha-vs-delta",
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shortest round-trip text, in exponent form outside `[1e-4, 1e15)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Sweep summary table, one row per record.
pub fn records_csv(records: &[&VerificationRecord]) -> String {
    let mut out = String::from(
        "id,kbar,eps_max,hypothesis_met,lambda1,D_hi,alpha,bound,theorem_margin,sigma,J_dev,grad_margin,sharpness_ratio\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&r.id),
            num(r.kbar),
            num(r.eps_max),
            r.hypothesis_met,
            num(r.lambda1),
            num(r.diameter_hi),
            num(r.alpha),
            num(r.bound),
            num(r.theorem_margin),
            num(r.sigma_measured),
            num(r.j_deviation),
            opt(r.gradient_margin),
            num(r.sharpness_ratio)
        );
    }
    out
}

/// Eigenfunction samples `t, u`.
pub fn eigen_csv(result: &EigenResult) -> String {
    let mut out = String::from("t,u\n");
    for (t, u) in result.t.iter().zip(&result.u) {
        let _ = writeln!(out, "{},{}", num(*t), num(*u));
    }
    out
}

/// Curvature samples `t, rho, rho_H`.
pub fn curvature_csv(samples: &[CurvatureSample]) -> String {
    let mut out = String::from("t,rho,rho_H\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{}", num(s.t), num(s.rho), num(s.rho_h));
    }
    out
}

/// `sharpness_ratio` against `fiber/L` over flat-torus records, sorted by
/// aspect.
pub fn sharpness_series(records: &[&VerificationRecord]) -> Result<Series> {
    let mut points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| match r.manifold {
            ManifoldSpec::FlatTorus { length, fiber, .. } => Some((fiber / length, r.sharpness_ratio)),
            _ => None,
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    nonempty(Series {
        title: "Sharpness of the diameter bound".into(),
        x_label: "aspect".into(),
        y_label: "lambda1 D^2 / pi^2".into(),
        points,
    })
}

/// `λ₁` against `k̄(p,0)`, sorted by `k̄`.
pub fn kbar_series(records: &[&VerificationRecord]) -> Result<Series> {
    let mut points: Vec<(f64, f64)> = records.iter().map(|r| (r.kbar, r.lambda1)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    nonempty(Series {
        title: "First eigenvalue against curvature excess".into(),
        x_label: "kbar".into(),
        y_label: "lambda1".into(),
        points,
    })
}

/// `α(δ)` at fixed `σ` and `Λ_rough` over the given `δ` values.
pub fn alpha_series(deltas: &[f64], sigma: f64, lambda_rough: f64) -> Result<Series> {
    let mut points = Vec::with_capacity(deltas.len());
    for &d in deltas {
        points.push((d, gradient_constants(d, sigma, lambda_rough)?.alpha));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    nonempty(Series {
        title: format!("alpha against delta (sigma = {sigma})"),
        x_label: "delta".into(),
        y_label: "alpha".into(),
        points,
    })
}

fn nonempty(s: Series) -> Result<Series> {
    if s.points.is_empty() {
        Err(Error::EmptySeries)
    } else {
        Ok(s)
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Padded `[lo, hi]` covering the finite values.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

/// Self-contained SVG line chart with markers, 800×600, five ticks per axis.
pub fn svg_line_chart(series: &Series) -> Result<String> {
    if series.points.is_empty() {
        return Err(Error::EmptySeries);
    }
    let (left, right, top, bottom) = (90.0, 30.0, 50.0, 70.0);
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let (x0, x1) = range(series.points.iter().map(|p| p.0));
    let (y0, y1) = range(series.points.iter().map(|p| p.1));
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&series.title)
    );
    let _ = writeln!(
        out,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..TICKS {
        let f = i as f64 / (TICKS - 1) as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ccc"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top,
            top + ph,
            top + ph + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{left:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ccc"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + pw,
            left - 6.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        HEIGHT - 20.0,
        escape(&series.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(&series.y_label)
    );
    let finite: Vec<(f64, f64)> =
        series.points.iter().cloned().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let path: Vec<String> = finite.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(out, r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="2" points="{}"/>"##, path.join(" "));
    for &(x, y) in &finite {
        let _ = writeln!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#1f4e9c"/>"##, sx(x), sy(y));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
