//! CSV, JSON and SVG writers. Output depends only on the report, so
//! identical runs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::Formats;
use crate::report::{rows, Report, CSV_HEADER};

#[derive(Debug, Error)]
#[error("{}: {source}", path.display())]
pub struct EmitError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for case in &report.cases {
        for r in rows(case) {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.case),
                csv_field(&r.name),
                csv_field(&r.value),
                opt(r.residual),
                opt(r.tolerance),
                r.provenance
            );
        }
    }
    out
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
pub const TICKS: usize = 6;
const MAX_POINTS: usize = 2000;
const MARGIN: (f64, f64, f64, f64) = (90.0, 20.0, 40.0, 60.0); // left, right, top, bottom

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{v:.3e}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A self-contained line chart with six ticks per axis.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], markers: bool) -> String {
    let (l, r, t, b) = MARGIN;
    let (pw, ph) = (WIDTH - l - r, HEIGHT - t - b);
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1));
    let sx = |x: f64| l + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| t + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{l:.2}" y="{t:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for i in 0..TICKS {
        let u = i as f64 / (TICKS - 1) as f64;
        let (xv, yv) = (x0 + u * (x1 - x0), y0 + u * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            t + ph,
            t + ph + 5.0,
            t + ph + 20.0,
            tick_label(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{l:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            l - 5.0,
            l - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        l + pw / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        t + ph / 2.0,
        t + ph / 2.0,
        escape(ylabel)
    );

    let stride = points.len().div_ceil(MAX_POINTS).max(1);
    let mut path = String::new();
    for (i, p) in points.iter().enumerate() {
        if i % stride == 0 || i + 1 == points.len() {
            let _ = write!(path, "{}{:.2},{:.2}", if path.is_empty() { "" } else { " " }, sx(p.0), sy(p.1));
        }
    }
    if !path.is_empty() {
        let _ = writeln!(s, r#"<polyline fill="none" stroke="steelblue" stroke-width="1.5" points="{path}"/>"#);
    }
    if markers {
        for p in points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(p.0), sy(p.1));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// `(file name, contents)` for every SVG the report produces.
pub fn svg_files(report: &Report) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for case in &report.cases {
        let Some(traj) = &case.trajectory else { continue };
        let tau = case.simulation.as_ref().map(|s| s.tau).unwrap_or(f64::NAN);
        for (c, name) in [(0, "y1"), (1, "y2")] {
            let pts: Vec<(f64, f64)> = traj.times().zip(&traj.states).map(|(t, x)| (t, x[c])).collect();
            let title = format!("{}: {name}(t), k = {}, tau = {}", case.label(), tick_label(case.params.k), tick_label(tau));
            out.push((
                format!("{}_{name}.svg", case.label()),
                line_chart(&title, "t (s)", name, &pts, false),
            ));
        }
    }
    if report.sweep.is_some() {
        let pts: Vec<(f64, f64)> = report
            .cases
            .iter()
            .filter_map(|c| c.simulation.as_ref())
            .filter_map(|s| s.amplitude.map(|a| (s.tau, a)))
            .collect();
        if report.cases.iter().any(|c| c.simulation.is_some()) {
            out.push((
                "sweep_amplitude.svg".into(),
                line_chart("steady amplitude of y1 against delay", "tau (s)", "amplitude", &pts, true),
            ));
        }
    }
    out
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, EmitError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| EmitError {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the requested formats into `dir` and returns the created paths.
pub fn emit_outputs(report: &Report, formats: Formats, dir: &Path) -> Result<Vec<PathBuf>, EmitError> {
    fs::create_dir_all(dir).map_err(|source| EmitError {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    if formats.csv {
        written.push(write(dir, "report.csv", &to_csv(report))?);
    }
    if formats.json {
        written.push(write(dir, "report.json", &to_json(report))?);
    }
    if formats.svg {
        for (name, body) in svg_files(report) {
            written.push(write(dir, &name, &body)?);
        }
    }
    Ok(written)
}
