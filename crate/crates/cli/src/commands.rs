//! Subcommand implementations. Each returns the text to print so the
//! binary stays a thin dispatcher.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dout_core::exponents::{
    dmt_curve, expected_sep_exponent, expected_tx_exponent, informed_exponent, min_bandwidth_ratio,
    separation_exponent,
};
use dout_core::outage::separation_regime;
use dout_core::{attach_slopes, optimal_separation_rate, run_sweep, ChannelInput, SweepResult};

use crate::error::{CliError, Result};
use crate::figure::{render_figure, FigureInput};
use crate::scenario_file::{load_scenario, LoadedScenario};
use crate::table::{format_float, parse_numeric_table, write_numeric_table, write_outage_table};

/// Environment variable overriding the default worker count.
pub const WORKERS_ENV: &str = "DOUT_WORKERS";

/// `--workers`, else `DOUT_WORKERS`, else the available parallelism.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::Argument("--workers must be at least 1".into()));
        }
        return Ok(n);
    }
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Argument(format!(
                "{WORKERS_ENV} must be a positive integer, got \"{v}\""
            ))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Parses `lo,hi`.
pub fn parse_pair(s: &str, what: &str) -> Result<(f64, f64)> {
    let parts: Vec<_> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(CliError::Argument(format!(
                "{what}: expected two numbers, got \"{s}\""
            ))),
        },
        _ => Err(CliError::Argument(format!(
            "{what}: expected lo,hi, got \"{s}\""
        ))),
    }
}

/// Parses `lo,hi,step`.
pub fn parse_triple(s: &str, what: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Argument(format!("{what}: expected lo,hi,step, got \"{s}\"")))?;
    match parts.as_slice() {
        &[lo, hi, step] if step > 0.0 && hi >= lo && lo > 0.0 => Ok((lo, hi, step)),
        _ => Err(CliError::Argument(format!(
            "{what}: need 0 < lo <= hi and step > 0, got \"{s}\""
        ))),
    }
}

struct ExponentLine {
    quantity: String,
    value: f64,
    detail: String,
}

fn exponent_lines(loaded: &LoadedScenario) -> Result<Vec<ExponentLine>> {
    let s = &loaded.scenario;
    let b = s.source.bandwidth_ratio;
    let target = s.distortion.target;
    let mut lines = Vec::new();
    let mut push = |quantity: &str, value: f64, detail: String| {
        lines.push(ExponentLine {
            quantity: quantity.to_string(),
            value,
            detail,
        })
    };

    let optimal = optimal_separation_rate(target, b)?;
    let rate = s.coding_rate.unwrap_or(optimal);
    let informed = informed_exponent(&s.config, &s.input, b, target)?;
    push(
        "informed_exponent",
        informed.value,
        informed.regime.to_string(),
    );
    let sep = separation_exponent(&s.config, &s.input, rate)?;
    let regime = separation_regime(target, s.distortion.d0, b, rate)?;
    push(
        "separation_exponent",
        sep.value,
        format!("{}; R_c={rate}; {}", sep.regime, regime.describe()),
    );
    push("optimal_rate", optimal, "R_s(target)/b".into());
    for k in 0..=s.config.min_antennas() {
        push(
            &format!("dmt_{k}"),
            dmt_curve(&s.config, k as f64)?,
            format!("r_c={k}"),
        );
    }
    let tx = expected_tx_exponent(&s.config, b)?;
    push("expected_tx_exponent", tx.value, tx.regime.to_string());
    let sep_exp = expected_sep_exponent(&s.config, b)?;
    push(
        "expected_sep_formula",
        sep_exp.formula.value,
        sep_exp.formula.regime.to_string(),
    );
    push(
        "expected_sep_oracle",
        sep_exp.oracle,
        "max_r min(2br, dmt(r))".into(),
    );
    match &s.input {
        ChannelInput::Gaussian => push(
            "min_bandwidth_ratio",
            0.0,
            "not applicable to gaussian inputs".into(),
        ),
        ChannelInput::Discrete(c) => push(
            "min_bandwidth_ratio",
            min_bandwidth_ratio(target, c.bits_per_symbol())?,
            format!("-log2(target)/(2m), m={}", c.bits_per_symbol()),
        ),
    }
    Ok(lines)
}

/// Closed-form exponent report for one scenario.
pub fn exponents_report(loaded: &LoadedScenario, csv: bool) -> Result<String> {
    let lines = exponent_lines(loaded)?;
    let mut out = String::new();
    for line in loaded.echo() {
        let _ = writeln!(out, "# {line}");
    }
    if csv {
        out.push_str("quantity,value,detail\n");
        for l in &lines {
            let _ = writeln!(
                out,
                "{},{},\"{}\"",
                l.quantity,
                format_float(l.value),
                l.detail
            );
        }
    } else {
        for l in &lines {
            let _ = writeln!(
                out,
                "{:<22} {:>12}  {}",
                l.quantity,
                trim_float(l.value),
                l.detail
            );
        }
    }
    Ok(out)
}

pub const EXPONENT_SWEEP_HEADER: [&str; 6] = [
    "b",
    "informed",
    "separation_optimal",
    "expected_tx",
    "expected_sep_formula",
    "expected_sep_oracle",
];

/// Exponents against the bandwidth ratio, on the grid `lo, lo+step, ..., hi`.
/// Separation is evaluated at the optimal rate for each `b`.
pub fn exponents_vs_b(loaded: &LoadedScenario, grid: (f64, f64, f64)) -> Result<String> {
    let s = &loaded.scenario;
    let (lo, hi, step) = grid;
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let mut rows = Vec::with_capacity(count);
    for k in 0..count {
        let b = lo + k as f64 * step;
        let target = s.distortion.target;
        let rate = optimal_separation_rate(target, b)?;
        let sep = expected_sep_exponent(&s.config, b)?;
        rows.push(vec![
            b,
            informed_exponent(&s.config, &s.input, b, target)?.value,
            separation_exponent(&s.config, &s.input, rate)?.value,
            expected_tx_exponent(&s.config, b)?.value,
            sep.formula.value,
            sep.oracle,
        ]);
    }
    Ok(write_numeric_table(
        &EXPONENT_SWEEP_HEADER,
        &rows,
        &loaded.echo(),
    ))
}

pub fn cmd_exponents(path: &Path, csv: bool, b_grid: Option<(f64, f64, f64)>) -> Result<String> {
    let loaded = load_scenario(path)?;
    match b_grid {
        Some(grid) => exponents_vs_b(&loaded, grid),
        None => exponents_report(&loaded, csv),
    }
}

pub struct SweepOutput {
    pub result: SweepResult,
    pub table: String,
    pub report: String,
}

/// Runs the sweep and renders the CSV table and the console report.
pub fn sweep_scenario(
    loaded: &LoadedScenario,
    workers: usize,
    window_db: Option<(f64, f64)>,
) -> Result<SweepOutput> {
    if loaded.sweep.is_none() {
        return Err(CliError::Argument("scenario has no [sweep] section".into()));
    }
    let mut result = run_sweep(&loaded.scenario, workers)?;
    let mut notes = Vec::new();
    if let Some(window) = window_db {
        match attach_slopes(result.clone(), window) {
            Ok(with) => result = with,
            Err(e) => notes.push(format!("warning: slope: {e}")),
        }
    }
    let mut comments = loaded.echo();
    for (name, slope) in [
        ("informed", &result.slope_informed),
        ("separation", &result.slope_separation),
    ] {
        if let Some(s) = slope {
            comments.push(format!(
                "slope {name}: {} over [{}, {}] dB ({} points, rms residual {})",
                s.fit.slope, s.low_db, s.high_db, s.fit.points, s.fit.residual
            ));
        }
    }
    let table = write_outage_table(&result, &comments);

    let mut report = String::new();
    for line in comments.iter().chain(&notes) {
        let _ = writeln!(report, "{line}");
    }
    for row in &result.rows {
        let _ = write!(
            report,
            "{:>8.3} dB  informed {:.6e} [{:.3e}, {:.3e}]",
            row.snr_db, row.informed.p_hat, row.informed.ci_low, row.informed.ci_high
        );
        if let Some(s) = &row.separation {
            let _ = write!(report, "  separation {:.6e}", s.p_hat);
        }
        let _ = writeln!(report, "  ({:.2}s)", row.wall_time_seconds);
    }
    Ok(SweepOutput {
        result,
        table,
        report,
    })
}

/// `sweep`: validates everything before creating `{prefix}.csv`.
pub fn cmd_sweep(
    path: &Path,
    workers: Option<usize>,
    out_prefix: &Path,
    window_db: Option<(f64, f64)>,
    confidence: Option<f64>,
) -> Result<(PathBuf, String)> {
    let mut loaded = load_scenario(path)?;
    if let Some(c) = confidence {
        if !(c > 0.0 && c < 1.0) {
            return Err(CliError::Argument(format!(
                "--confidence must lie in (0, 1), got {c}"
            )));
        }
        loaded.scenario.confidence = c;
    }
    let workers = resolve_workers(workers)?;
    let output = sweep_scenario(&loaded, workers, window_db)?;
    let mut csv_path = out_prefix.as_os_str().to_owned();
    csv_path.push(".csv");
    let csv_path = PathBuf::from(csv_path);
    std::fs::write(&csv_path, &output.table).map_err(|source| CliError::Io {
        path: csv_path.clone(),
        source,
    })?;
    Ok((csv_path, output.report))
}

/// `figure`: reads the tables in order and writes one SVG.
pub fn cmd_figure(inputs: &[PathBuf], out: &Path) -> Result<()> {
    let mut tables = Vec::with_capacity(inputs.len());
    for path in inputs {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        tables.push(FigureInput {
            table: parse_numeric_table(&text, &path.display().to_string())?,
            label,
        });
    }
    let svg = render_figure(&tables)?;
    std::fs::write(out, svg).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })
}

fn trim_float(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.6}")
    }
}
