//! Report files: `report.json`, `amvp_decay.csv` and `decay.svg`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::campaign::{AlphaSeries, VerificationReport};
use crate::amvp::DecayOutcome;
use crate::error::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const CSV_FILE: &str = "amvp_decay.csv";
pub const SVG_FILE: &str = "decay.svg";
pub const CSV_HEADER: &str = "r,alpha,residual,slope_window";

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes the three report files into `dir`, creating it if needed.
pub fn emit_outputs(report: &VerificationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let files = [
        (REPORT_FILE, report_json(report)?),
        (CSV_FILE, decay_csv(report)),
        (SVG_FILE, decay_svg(report)),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(io_error(&path))?;
        written.push(path);
    }
    Ok(written)
}

pub fn report_json(report: &VerificationReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn load_report(path: &Path) -> Result<VerificationReport> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Least-squares slope of `log |residual|` over the three rungs ending at
/// `j`, when all three lie above their floors.
pub fn window_slope(series: &AlphaSeries, j: usize) -> Option<f64> {
    if j < 2 {
        return None;
    }
    let idx = j - 2..=j;
    if idx.clone().any(|i| series.residuals[i].abs() <= series.floors[i]) {
        return None;
    }
    let pts: Vec<(f64, f64)> = idx
        .map(|i| (series.radii[i].ln(), series.residuals[i].abs().ln()))
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// One row per rung and weight of the critical-point ladder.
pub fn decay_csv(report: &VerificationReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for series in &report.critical {
        for (j, (r, res)) in series.radii.iter().zip(&series.residuals).enumerate() {
            let window = window_slope(series, j).map(|v| format!("{v:e}")).unwrap_or_default();
            // writing into a String cannot fail
            let _ = writeln!(s, "{r:e},{:e},{res:e},{window}", series.alpha);
        }
    }
    s
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const LEGEND: f64 = 200.0;
const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

/// Text of the legend entry for one series; also what the parse-back in the
/// tests reads.
pub fn series_label(series: &AlphaSeries) -> String {
    let name = if series.is_weight { "weight " } else { "" };
    match series.outcome {
        DecayOutcome::Fitted(f) => format!("{name}alpha={:.4} slope={:.4}", series.alpha, f.slope),
        DecayOutcome::Vanishing { .. } => format!("{name}alpha={:.4} vanishing", series.alpha),
    }
}

/// Log-log plot of `|residual|` against `r` for each weight, with the fitted
/// lines.
pub fn decay_svg(report: &VerificationReport) -> String {
    let mut pts = Vec::new();
    for s in &report.critical {
        for (r, v) in s.radii.iter().zip(&s.residuals) {
            if *v != 0.0 {
                pts.push((r.log10(), v.abs().log10()));
            }
        }
    }
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (-3.0, 0.0, -16.0, 0.0);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">log10 r</text>"#,
        MARGIN + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">log10 |residual|</text>"#,
        MARGIN + plot_h / 2.0,
        MARGIN + plot_h / 2.0
    );
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{x:.2}</text>"#,
            sx(x),
            HEIGHT - MARGIN + 16.0
        );
    }
    for y in [y0, y1] {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.1}</text>"#,
            MARGIN - 4.0,
            sy(y) + 4.0
        );
    }

    for (i, series) in report.critical.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let _ = writeln!(s, r#"<g class="series" stroke="{color}" fill="{color}">"#);
        for (r, v) in series.radii.iter().zip(&series.residuals) {
            if *v != 0.0 {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#,
                    sx(r.log10()),
                    sy(v.abs().log10())
                );
            }
        }
        if let DecayOutcome::Fitted(f) = series.outcome {
            let used: Vec<f64> = series
                .radii
                .iter()
                .zip(&series.residuals)
                .zip(&series.floors)
                .filter(|((_, v), fl)| v.abs() > **fl)
                .map(|((r, _), _)| r.ln())
                .collect();
            let (a, b) = used
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let line = |lr: f64| (f.intercept + f.slope * lr) / std::f64::consts::LN_10;
            let ln10 = std::f64::consts::LN_10;
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke-width="1.5"/>"#,
                sx(a / ln10),
                sy(line(a)),
                sx(b / ln10),
                sy(line(b))
            );
        }
        let ly = MARGIN + 18.0 * i as f64 + 10.0;
        let lx = WIDTH - LEGEND - MARGIN + 20.0;
        let _ = writeln!(s, r#"<rect x="{lx:.2}" y="{:.2}" width="10" height="10"/>"#, ly - 9.0);
        let _ = writeln!(
            s,
            r#"<text class="label" x="{:.2}" y="{ly:.2}" stroke="none">{}</text>"#,
            lx + 16.0,
            series_label(series)
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    s
}
