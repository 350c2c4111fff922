//! Static SVG line charts of a summary, one polyline per series.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::Method;
use crate::error::{ExperimentError, Result};
use crate::summary::SummaryRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;
const TICKS: usize = 5;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Which summary column goes on the horizontal axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XAxis {
    SnrDb,
    Streams,
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

/// SNR sweeps plot against SNR; a summary with a single SNR and several
/// stream counts plots against `N_s`.
pub fn choose_axis(summary: &[SummaryRow]) -> XAxis {
    let first = summary[0].snr_db;
    let single_snr = summary.iter().all(|r| r.snr_db == first);
    let several_ns = summary.iter().any(|r| r.n_s != summary[0].n_s);
    if single_snr && several_ns {
        XAxis::Streams
    } else {
        XAxis::SnrDb
    }
}

fn build_series(summary: &[SummaryRow], axis: XAxis) -> Vec<Series> {
    let mut keys: Vec<(Method, Option<usize>)> = summary
        .iter()
        .map(|r| {
            let split = axis == XAxis::SnrDb && summary.iter().any(|o| o.n_s != r.n_s);
            (r.method, split.then_some(r.n_s))
        })
        .collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(method, n_s)| {
            let mut points: Vec<(f64, f64)> = summary
                .iter()
                .filter(|r| r.method == method && n_s.is_none_or(|k| r.n_s == k))
                .map(|r| match axis {
                    XAxis::SnrDb => (r.snr_db, r.mean),
                    XAxis::Streams => (r.n_s as f64, r.mean),
                })
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let label = match n_s {
                Some(k) => format!("{method} (N_s={k})"),
                None => method.to_string(),
            };
            Series { label, points }
        })
        .collect()
}

/// Data range widened by 5% of its span on both sides (±1 for a point).
pub fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        (lo - 1.0, hi + 1.0)
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Render the summary as an SVG document.
pub fn render_svg(summary: &[SummaryRow]) -> Result<String> {
    if summary.is_empty() {
        return Err(ExperimentError::Config("nothing to plot".into()));
    }
    let axis = choose_axis(summary);
    let series = build_series(summary, axis);
    let (x0, x1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let (y0, y1) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    // writing into a String cannot fail
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let t = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            w,
            r##"<line x1="{gx:.2}" y1="{TOP}" x2="{gx:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
            TOP + plot_h
        );
        let _ = writeln!(
            w,
            r##"<line x1="{LEFT}" y1="{gy:.2}" x2="{:.2}" y2="{gy:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            w,
            r#"<text x="{gx:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            gy + 4.0,
            tick_label(yv)
        );
    }
    let x_title = match axis {
        XAxis::SnrDb => "SNR (dB)",
        XAxis::Streams => "Number of streams N_s",
    };
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_title}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">Spectral efficiency (bits/s/Hz)</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            w,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, s.label);
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

/// Write the SVG for `summary` to `path`.
pub fn emit_plot(summary: &[SummaryRow], path: &Path) -> Result<()> {
    let svg = render_svg(summary)?;
    std::fs::write(path, svg)?;
    Ok(())
}
