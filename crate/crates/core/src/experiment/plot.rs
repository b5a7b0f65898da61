//! Plot data: a multi-column CSV and a small SVG preview.
//!
//! The CSV header is `t,<label1>,<label2>,...`; every column except `t` is
//! scaled to a maximum of exactly one. The SVG is an 800×400 canvas with a
//! frame, one `<polyline>` per column in a fixed colour cycle, and a legend of
//! `<text>` labels in the top right corner. Nothing outside the file is referenced.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::signal::{fmt17, Signal};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const COLOURS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct PlotFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
}

/// Writes `csv_path` and the same path with an `.svg` extension.
///
/// All signals must share one grid. A column that cannot be scaled to a
/// maximum of one is reported by its label.
pub fn emit_plot_data(signals: &[(String, Signal)], csv_path: impl AsRef<Path>) -> Result<PlotFiles> {
    let csv_path = csv_path.as_ref();
    let (first_label, first) = signals
        .first()
        .ok_or_else(|| Error::InvalidInput("nothing to plot".into()))?;
    let mut columns = Vec::with_capacity(signals.len());
    for (label, s) in signals {
        if label.is_empty() || label.contains([',', '\n', '\r', '"']) || label == "t" {
            return Err(Error::InvalidInput(format!("unusable column label {label:?}")));
        }
        if !s.same_grid(first) {
            return Err(Error::GridMismatch(format!("column `{label}` is not on the grid of `{first_label}`")));
        }
        let scaled = s.normalized().map_err(|_| Error::ZeroSignal(label.clone()))?;
        columns.push(scaled.into_samples());
    }

    let mut csv = String::from("t");
    for (label, _) in signals {
        csv.push(',');
        csv.push_str(label);
    }
    csv.push('\n');
    for i in 0..first.len() {
        csv.push_str(&fmt17(first.time(i)));
        for c in &columns {
            csv.push(',');
            csv.push_str(&fmt17(c[i]));
        }
        csv.push('\n');
    }
    fs::write(csv_path, csv).map_err(|e| Error::io(csv_path, e))?;

    let svg_path = csv_path.with_extension("svg");
    let labels: Vec<&str> = signals.iter().map(|(l, _)| l.as_str()).collect();
    let svg = render_svg(first, &labels, &columns);
    fs::write(&svg_path, svg).map_err(|e| Error::io(&svg_path, e))?;
    Ok(PlotFiles {
        csv: csv_path.to_path_buf(),
        svg: svg_path,
    })
}

fn render_svg(grid: &Signal, labels: &[&str], columns: &[Vec<f64>]) -> String {
    let t0 = grid.t0();
    let t1 = grid.time(grid.len() - 1);
    let lo = columns
        .iter()
        .flatten()
        .copied()
        .fold(0.0_f64, f64::min);
    let x = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - (v - lo) / (1.0 - lo) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    if lo < 0.0 {
        let _ = writeln!(
            out,
            r##"<line x1="{MARGIN}" y1="{y0:.2}" x2="{}" y2="{y0:.2}" stroke="#bbbbbb"/>"##,
            WIDTH - MARGIN,
            y0 = y(0.0)
        );
    }
    for (k, (label, col)) in labels.iter().zip(columns).enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let points: Vec<String> = col
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:.2},{:.2}", x(grid.time(i)), y(*v)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{colour}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 * (k as f64 + 1.0),
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN}" y="{}" font-family="sans-serif" font-size="12">t = {t0:.3e} .. {t1:.3e} s</text>"#,
        HEIGHT - 12.0
    );
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
