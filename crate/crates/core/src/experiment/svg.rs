//! Minimal SVG plot of mean regret per round against the horizon.

use std::fmt::Write;

use super::report::ExperimentReport;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 40.0;

/// Polyline of `mean_per_round` over `log₂T`, with one marker per horizon.
pub fn render_svg(report: &ExperimentReport) -> String {
    let points: Vec<(f64, f64)> = report
        .summaries
        .iter()
        .filter(|s| s.mean_per_round.is_finite())
        .map(|s| ((s.horizon as f64).log2(), s.mean_per_round))
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20" font-size="12">{}: regret per round vs log2 T</text>"#, escape(&report.scenario));
    if !points.is_empty() {
        let (x0, x1) = bounds(points.iter().map(|p| p.0));
        let (y0, y1) = bounds(points.iter().map(|p| p.1).chain([0.0]));
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
        let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="black" points="{}"/>"#, path.join(" "));
        for &(x, y) in &points {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3"/>"#, sx(x), sy(y));
        }
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
