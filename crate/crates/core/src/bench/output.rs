//! CSV and SVG emission.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bench::sweep::SweepResult;
use crate::error::{Error, Result};

/// One CSV line. `trial_or_median` holds the trial index or the word `median`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub algorithm: String,
    pub n: usize,
    pub p: f64,
    pub s: f64,
    pub beta: f64,
    pub trial_or_median: String,
    pub accuracy: f64,
    pub runtime_ms: Option<f64>,
    pub seed: u64,
}

pub const MEDIAN: &str = "median";

/// Trial rows of each grid point followed by its median row. Runtimes are
/// left empty unless the sweep was configured with `timing`, so that reruns
/// compare byte for byte.
pub fn sweep_rows(sweep: &SweepResult) -> Vec<CsvRow> {
    let c = &sweep.config;
    let timing = |ms: f64| c.timing.then_some(ms);
    let mut rows = Vec::with_capacity(sweep.trials.len() + sweep.points.len());
    for pt in &sweep.points {
        for t in sweep.trials.iter().filter(|t| t.n == pt.n && t.beta_index == pt.beta_index) {
            rows.push(CsvRow {
                algorithm: c.algorithm.to_string(),
                n: t.n,
                p: t.p,
                s: t.s,
                beta: t.beta,
                trial_or_median: t.trial.to_string(),
                accuracy: t.accuracy,
                runtime_ms: timing(t.runtime_ms()),
                seed: t.substream,
            });
        }
        rows.push(CsvRow {
            algorithm: c.algorithm.to_string(),
            n: pt.n,
            p: pt.p,
            s: pt.s,
            beta: pt.beta,
            trial_or_median: MEDIAN.into(),
            accuracy: pt.median_accuracy,
            runtime_ms: timing(pt.median_runtime_ms),
            seed: c.seed,
        });
    }
    rows
}

pub fn write_csv_to<W: Write>(rows: &[CsvRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::domain("nothing to write"));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::domain("nothing to write"));
    }
    let mut buf = Vec::new();
    write_csv_to(rows, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_csv_from<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        },
        other => other,
    })
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io("<csv>", io),
        kind => Error::Parse {
            path: "<csv>".into(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// A named polyline for [`svg_plot`].
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot with one `<polyline>` per series; y is fixed to `[0, 1]`.
pub fn svg_plot(series: &[Series], x_label: &str, y_label: &str) -> Result<String> {
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs.filter(|x| x.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
    }
    if series.is_empty() || !x0.is_finite() {
        return Err(Error::domain("nothing to plot"));
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path d="M{left},{top} V{bottom} H{right}" fill="none" stroke="black"/>"#);
    for (i, tick) in [x0, 0.5 * (x0 + x1), x1].iter().enumerate() {
        let anchor = ["start", "middle", "end"][i];
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            sx(*tick),
            bottom + 16.0,
            format_tick(*tick)
        );
    }
    for tick in [0.0, 0.5, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{tick}</text>"#,
            left - 6.0,
            sy(tick) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        0.5 * (left + right),
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        0.5 * (top + bottom),
        0.5 * (top + bottom),
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            pts.join(" "),
            escape(&s.label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            right - 80.0,
            top + 14.0 * (i as f64 + 1.0),
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e4) {
        format!("{x:.2e}")
    } else {
        format!("{:.4}", x)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Median curves of a sweep, one series per `n`.
pub fn sweep_series(sweep: &SweepResult) -> Vec<Series> {
    sweep
        .curves()
        .into_iter()
        .map(|c| Series {
            label: format!("n = {}", c.n),
            points: c.points,
        })
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
