//! Static SVG line charts.
//!
//! Outage tables (first column `snr_db`) are drawn on a log10 probability
//! axis, one series per probability column and input file. Exponent tables
//! (first column `b`) are drawn on a linear axis against the bandwidth
//! ratio. Output depends only on the inputs.

use std::fmt::Write as _;

use crate::error::{CliError, Result};
use crate::table::NumericTable;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];
const DASHES: [&str; 4] = ["", "7,4", "2,3", "9,3,2,3"];

pub struct FigureInput {
    pub label: String,
    pub table: NumericTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Outage,
    Exponent,
}

struct Series {
    label: String,
    color: &'static str,
    dash: &'static str,
    points: Vec<(f64, Option<f64>)>,
}

fn fail(msg: impl Into<String>) -> CliError {
    CliError::Figure(msg.into())
}

fn kind_of(table: &NumericTable, label: &str) -> Result<Kind> {
    match table.header.first().map(String::as_str) {
        Some("snr_db") if table.is_outage_table() => Ok(Kind::Outage),
        Some("b") => Ok(Kind::Exponent),
        _ => Err(fail(format!(
            "{label}: not an outage table (snr_db,...) or exponent table (b,...)"
        ))),
    }
}

fn series_columns(kind: Kind, table: &NumericTable) -> Vec<usize> {
    match kind {
        Kind::Outage => ["informed_p", "separation_p"]
            .iter()
            .filter_map(|c| table.column(c))
            .collect(),
        Kind::Exponent => (1..table.header.len()).collect(),
    }
}

fn x_values(table: &NumericTable, label: &str) -> Result<Vec<f64>> {
    table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.first()
                .copied()
                .flatten()
                .ok_or_else(|| fail(format!("{label}: data row {} has no x value", i + 1)))
        })
        .collect()
}

pub fn render_figure(inputs: &[FigureInput]) -> Result<String> {
    let first = inputs
        .first()
        .ok_or_else(|| fail("at least one table is required"))?;
    let kind = kind_of(&first.table, &first.label)?;

    let mut series = Vec::new();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (f, input) in inputs.iter().enumerate() {
        if kind_of(&input.table, &input.label)? != kind {
            return Err(fail(format!(
                "{}: table kind differs from {}",
                input.label, first.label
            )));
        }
        let grid = x_values(&input.table, &input.label)?;
        if grid.len() < 2 {
            return Err(fail(format!(
                "{}: need at least two rows to draw a line, got {}",
                input.label,
                grid.len()
            )));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(fail(format!(
                "{}: x values must be increasing",
                input.label
            )));
        }
        x_lo = x_lo.min(grid[0]);
        x_hi = x_hi.max(grid[grid.len() - 1]);
        for (s, col) in series_columns(kind, &input.table).into_iter().enumerate() {
            let values: Vec<Option<f64>> = input
                .table
                .rows
                .iter()
                .map(|r| r.get(col).copied().flatten())
                .collect();
            if values.iter().all(Option::is_none) {
                continue;
            }
            series.push(Series {
                label: format!("{}: {}", input.label, input.table.header[col]),
                color: COLORS[(f * 2 + s) % COLORS.len()],
                dash: DASHES[f % DASHES.len()],
                points: grid.iter().copied().zip(values).collect(),
            });
        }
    }
    if series.is_empty() {
        return Err(fail("no data columns to plot"));
    }
    if kind == Kind::Outage {
        for s in &mut series {
            for p in &mut s.points {
                p.1 = p.1.filter(|v| *v > 0.0);
            }
        }
    }

    let values: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().filter_map(|p| p.1))
        .collect();
    let y_axis = match kind {
        Kind::Outage => {
            if values.is_empty() {
                return Err(fail(
                    "every probability is zero; nothing to draw on a log axis",
                ));
            }
            let lo = values
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
                .log10()
                .floor();
            let hi = values
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max)
                .log10()
                .ceil();
            Axis::Log {
                lo,
                hi: if hi > lo { hi } else { lo + 1.0 },
            }
        }
        Kind::Exponent => {
            let max = values.iter().copied().fold(0.0, f64::max);
            let step = nice_step(if max > 0.0 { max } else { 1.0 } / 6.0);
            Axis::Linear {
                lo: 0.0,
                hi: (max / step).ceil().max(1.0) * step,
                step,
            }
        }
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| TOP + (1.0 - y_axis.fraction(y)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    svg.push_str("<desc>\n");
    for input in inputs {
        let _ = writeln!(svg, "{}", escape(&input.label));
        for c in &input.table.comments {
            let _ = writeln!(svg, "  {}", escape(c));
        }
    }
    svg.push_str("</desc>\n");
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Grid lines and tick labels.
    svg.push_str("<g class=\"axes\" stroke=\"#dddddd\" stroke-width=\"1\">\n");
    let x_step = nice_step((x_hi - x_lo) / 8.0);
    let x_ticks = ticks(x_lo, x_hi, x_step);
    for &t in &x_ticks {
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{y:.2}"/>"#,
            x = px(t),
            y = TOP + plot_h
        );
    }
    let y_ticks = y_axis.ticks();
    for &(t, _) in &y_ticks {
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{x:.2}" y2="{y:.2}"/>"#,
            y = py(t),
            x = LEFT + plot_w
        );
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    svg.push_str("<g class=\"labels\">\n");
    for &t in &x_ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle">{label}</text>"#,
            x = px(t),
            y = TOP + plot_h + 18.0,
            label = compact(t)
        );
    }
    for (t, label) in &y_ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">{label}</text>"#,
            x = LEFT - 6.0,
            y = py(*t),
        );
    }
    let (x_label, y_label) = match kind {
        Kind::Outage => ("SNR (dB)", "Distortion outage probability"),
        Kind::Exponent => ("Bandwidth ratio b", "SNR exponent"),
    };
    let _ = writeln!(
        svg,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle">{x_label}</text>"#,
        x = LEFT + plot_w / 2.0,
        y = HEIGHT - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{x:.2}" y="{y:.2}" text-anchor="middle" transform="rotate(-90 {x:.2} {y:.2})">{y_label}</text>"#,
        x = 22.0,
        y = TOP + plot_h / 2.0
    );
    svg.push_str("</g>\n");

    for s in &series {
        let _ = writeln!(
            svg,
            r#"<g class="series" stroke="{c}" fill="{c}"><title>{t}</title>"#,
            c = s.color,
            t = escape(&s.label)
        );
        let dash = if s.dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{}""#, s.dash)
        };
        for run in s.points.split(|p| p.1.is_none()) {
            let pts: Vec<String> = run
                .iter()
                .filter_map(|&(x, y)| y.map(|y| format!("{:.2},{:.2}", px(x), py(y))))
                .collect();
            if pts.len() >= 2 {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke-width="1.8"{dash} points="{}"/>"#,
                    pts.join(" ")
                );
            }
            for &(x, y) in run {
                if let Some(y) = y {
                    let _ = writeln!(
                        svg,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
                        px(x),
                        py(y)
                    );
                }
            }
        }
        svg.push_str("</g>\n");
    }

    svg.push_str("<g class=\"legend\">\n");
    for (i, s) in series.iter().enumerate() {
        let y = TOP + 12.0 + 20.0 * i as f64;
        let x = LEFT + plot_w + 14.0;
        let dash = if s.dash.is_empty() {
            String::new()
        } else {
            format!(r#" stroke-dasharray="{}""#, s.dash)
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x2:.2}" y2="{y:.2}" stroke="{c}" stroke-width="1.8"{dash}/>"#,
            x2 = x + 26.0,
            c = s.color
        );
        let _ = writeln!(
            svg,
            r#"<text x="{tx:.2}" y="{y:.2}" dominant-baseline="middle">{}</text>"#,
            escape(&s.label),
            tx = x + 32.0
        );
    }
    svg.push_str("</g>\n</svg>\n");
    Ok(svg)
}

#[derive(Debug, Clone, Copy)]
enum Axis {
    Log { lo: f64, hi: f64 },
    Linear { lo: f64, hi: f64, step: f64 },
}

impl Axis {
    fn fraction(&self, y: f64) -> f64 {
        match *self {
            Axis::Log { lo, hi } => (y.log10() - lo) / (hi - lo),
            Axis::Linear { lo, hi, .. } => (y - lo) / (hi - lo),
        }
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match *self {
            Axis::Log { lo, hi } => {
                let (lo, hi) = (lo as i32, hi as i32);
                (lo..=hi)
                    .map(|k| (10f64.powi(k), format!("1e{k}")))
                    .collect()
            }
            Axis::Linear { lo, hi, step } => ticks(lo, hi, step)
                .into_iter()
                .map(|t| (t, compact(t)))
                .collect(),
        }
    }
}

/// 1, 2 or 5 times a power of ten, at least `raw`.
fn nice_step(raw: f64) -> f64 {
    if !(raw > 0.0) {
        return 1.0;
    }
    let base = 10f64.powf(raw.log10().floor());
    let scaled = raw / base;
    let m = if scaled <= 1.0 {
        1.0
    } else if scaled <= 2.0 {
        2.0
    } else if scaled <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * base
}

fn ticks(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let start = (lo / step - 1e-9).ceil() as i64;
    let end = (hi / step + 1e-9).floor() as i64;
    (start..=end).map(|k| k as f64 * step).collect()
}

fn compact(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
