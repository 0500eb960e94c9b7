//! Static log-log SVG charts: regret versus horizon with the fitted slope
//! drawn and annotated. Output is a self-contained vector file, no scripts,
//! no external references.

use std::path::{Path, PathBuf};

use bco::ledger::rate_fit;

use crate::config::{config_err, CliError};
use crate::csvio::{atomic_write, read_table};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_RIGHT: f64 = 600.0;
const PLOT_TOP: f64 = 60.0;
const PLOT_BOTTOM: f64 = 420.0;

/// Renders one SVG per metric column of a means table whose first column is
/// the horizon (or any positive x variable). Count-like columns (`seed`,
/// `n_*`) are skipped. Returns the files written.
pub fn plot_file(summary: &Path, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (header, rows) = read_table(summary)?;
    if rows.is_empty() {
        return Err(config_err(format!(
            "{}: no data rows to plot (0 rows)",
            summary.display()
        )));
    }
    if header.len() < 2 {
        return Err(config_err(format!(
            "{}: need an x column plus at least one metric column",
            summary.display()
        )));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let mut written = Vec::new();
    for (j, name) in header.iter().enumerate().skip(1) {
        if name == "seed" || name.starts_with("n_") || name == "wall_time_s" {
            continue;
        }
        let ys: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        let svg = render_loglog(&header[0], name, &xs, &ys)?;
        let path = out_dir.join(format!("plot_{}.svg", sanitize(name)));
        atomic_write(&path, svg.as_bytes())?;
        written.push(path);
    }
    if written.is_empty() {
        return Err(config_err(format!(
            "{}: no metric columns to plot",
            summary.display()
        )));
    }
    Ok(written)
}

/// Log-log chart of one metric: data polyline, points, a dashed fitted
/// power law, and the slope annotation.
pub fn render_loglog(
    x_label: &str,
    metric: &str,
    xs: &[f64],
    ys: &[f64],
) -> Result<String, CliError> {
    let points: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    let slope = rate_fit(&points).map_err(|e| {
        config_err(format!("cannot fit a rate for column '{metric}': {e}"))
    })?;
    let lx: Vec<f64> = xs.iter().map(|x| x.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log10()).collect();
    let (lx_min, lx_max) = span(&lx);
    let (mut ly_min, mut ly_max) = span(&ly);
    if ly_max - ly_min < 1e-12 {
        // Flat data still deserves a visible line.
        ly_min -= 0.5;
        ly_max += 0.5;
    }
    let px = |v: f64| PLOT_LEFT + (v - lx_min) / (lx_max - lx_min) * (PLOT_RIGHT - PLOT_LEFT);
    let py = |v: f64| PLOT_BOTTOM - (v - ly_min) / (ly_max - ly_min) * (PLOT_BOTTOM - PLOT_TOP);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{PLOT_LEFT}\" y=\"{PLOT_TOP}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"#404040\" stroke-width=\"1\"/>\n",
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"30\" font-family=\"monospace\" font-size=\"16\" \
         text-anchor=\"middle\">{} vs {} (log-log)</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        escape(metric),
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"{PLOT_RIGHT}\" y=\"50\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"end\">fitted slope = {slope:.3}</text>\n"
    ));

    // X ticks at every data point, Y ticks on a fixed 4-stop scale.
    for (&x, &v) in xs.iter().zip(&lx) {
        let p = px(v);
        svg.push_str(&format!(
            "<line x1=\"{p:.2}\" y1=\"{PLOT_BOTTOM}\" x2=\"{p:.2}\" y2=\"{}\" \
             stroke=\"#404040\"/>\n",
            PLOT_BOTTOM + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{p:.2}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            PLOT_BOTTOM + 18.0,
            fmt_tick(x)
        ));
    }
    for k in 0..4 {
        let v = ly_min + (ly_max - ly_min) * k as f64 / 3.0;
        let p = py(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{p:.2}\" x2=\"{PLOT_LEFT}\" y2=\"{p:.2}\" stroke=\"#404040\"/>\n",
            PLOT_LEFT - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"end\">{:.3e}</text>\n",
            PLOT_LEFT - 8.0,
            p + 4.0,
            10f64.powf(v)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"13\" \
         text-anchor=\"middle\">{}</text>\n",
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        PLOT_BOTTOM + 40.0,
        escape(x_label)
    ));

    // Dashed fitted power law behind the data.
    let mean_lx: f64 = lx.iter().sum::<f64>() / lx.len() as f64;
    let mean_ly: f64 = ly.iter().sum::<f64>() / ly.len() as f64;
    let intercept = mean_ly - slope * mean_lx;
    let fit_y0 = py(intercept + slope * lx_min);
    let fit_y1 = py(intercept + slope * lx_max);
    svg.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{fit_y0:.2}\" x2=\"{:.2}\" y2=\"{fit_y1:.2}\" \
         stroke=\"#999999\" stroke-dasharray=\"6 4\"/>\n",
        px(lx_min),
        px(lx_max)
    ));

    let polyline: Vec<String> = lx
        .iter()
        .zip(&ly)
        .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#3465a4\" stroke-width=\"1.5\"/>\n",
        polyline.join(" ")
    ));
    for (&a, &b) in lx.iter().zip(&ly) {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#3465a4\"/>\n",
            px(a),
            py(b)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn span(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn fmt_tick(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.3}")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
