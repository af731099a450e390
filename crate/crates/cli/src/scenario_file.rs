//! TOML scenario files.
//!
//! ```toml
//! [system]
//! nt = 2
//! nr = 2
//! blocks = 1
//!
//! [input]
//! kind = "gaussian"          # or "discrete"
//! # constellation = "psk"    # "psk" | "qam" | "bpsk" | "qpsk" | "8psk" | "16qam" | "64qam"
//! # m = 1
//! # noise_samples = 2000
//!
//! [source]
//! bandwidth_ratio = 2.0
//!
//! [distortion]
//! target = 0.05
//! d0 = 0.5
//!
//! [separation]
//! rate = "optimal"           # or a number of bits per channel use
//!
//! [sweep]
//! snr_db_start = 0.0
//! snr_db_stop = 20.0
//! snr_db_step = 2.0
//! trials = 100000
//! seed = 1
//! confidence = 0.95
//! ```
//!
//! Unknown keys are rejected. `[separation]` may be omitted to run the
//! informed bound alone, and `[sweep]` is only needed by `sweep`.

use std::path::Path;

use dout_core::model::{snr_grid_db, DEFAULT_CONFIDENCE, DEFAULT_D0};
use dout_core::mutual_info::MiEstimatorSettings;
use dout_core::outage::separation_regime;
use dout_core::{
    optimal_separation_rate, ChannelInput, Constellation, DistortionSpec, Scenario, SourceModel,
    SystemConfig,
};
use serde::Deserialize;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    system: SystemSection,
    input: InputSection,
    source: SourceSection,
    distortion: DistortionSection,
    separation: Option<SeparationSection>,
    sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    nt: usize,
    nr: usize,
    blocks: usize,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum InputKind {
    Gaussian,
    Discrete,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSection {
    kind: InputKind,
    constellation: Option<String>,
    m: Option<u32>,
    noise_samples: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceSection {
    bandwidth_ratio: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistortionSection {
    target: f64,
    d0: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RateSpec {
    Value(f64),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeparationSection {
    rate: RateSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    snr_db_start: f64,
    snr_db_stop: f64,
    snr_db_step: f64,
    trials: u64,
    seed: u64,
    confidence: Option<f64>,
}

/// Where the separation rate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateSource {
    Optimal,
    Explicit,
    Absent,
}

/// Sweep parameters as written in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedScenario {
    /// Without a `[sweep]` section the grid holds the single point 0 dB and
    /// `trials = 1`; only `exponents` accepts such files.
    pub scenario: Scenario,
    pub rate_source: RateSource,
    pub sweep: Option<SweepSpec>,
}

impl LoadedScenario {
    /// Metadata lines describing the resolved scenario, without comment
    /// markers.
    pub fn echo(&self) -> Vec<String> {
        let s = &self.scenario;
        let mut lines = vec![format!(
            "system: nt={} nr={} blocks={}",
            s.config.n_t, s.config.n_r, s.config.blocks
        )];
        lines.push(match &s.input {
            ChannelInput::Gaussian => "input: gaussian".to_string(),
            ChannelInput::Discrete(c) => format!(
                "input: {} m={} noise_samples={} mi_seed={}",
                c.label(),
                c.bits_per_symbol(),
                s.mi.noise_samples,
                s.mi.mi_seed
            ),
        });
        lines.push(format!(
            "source: bandwidth_ratio={}",
            s.source.bandwidth_ratio
        ));
        lines.push(format!(
            "distortion: target={} d0={}",
            s.distortion.target, s.distortion.d0
        ));
        lines.push(match s.coding_rate {
            Some(rate) => {
                let regime = separation_regime(
                    s.distortion.target,
                    s.distortion.d0,
                    s.source.bandwidth_ratio,
                    rate,
                )
                .map(|r| r.describe())
                .unwrap_or("invalid");
                let origin = match self.rate_source {
                    RateSource::Optimal => "optimal",
                    _ => "explicit",
                };
                format!("separation: rate={rate} ({origin}) regime={regime}")
            }
            None => "separation: none".to_string(),
        });
        if let Some(sw) = &self.sweep {
            lines.push(format!(
                "sweep: snr_db_start={} snr_db_stop={} snr_db_step={} points={} trials={} seed={} confidence={}",
                sw.start_db,
                sw.stop_db,
                sw.step_db,
                s.snr_grid_db.len(),
                s.trials,
                s.seed,
                s.confidence
            ));
        }
        lines
    }
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Parses scenario text; `origin` names the source in error messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<LoadedScenario> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Scenario {
        path: origin.to_string(),
        message: e.to_string().trim_end().to_string(),
    })?;
    let fail = |section: &str, key: &str, message: String| match key_line(text, section, key) {
        Some(line) => CliError::ScenarioAt {
            path: origin.to_string(),
            line,
            message: format!("[{section}] {key}: {message}"),
        },
        None => CliError::Scenario {
            path: origin.to_string(),
            message: format!("[{section}] {key}: {message}"),
        },
    };

    let sys = &file.system;
    let config = SystemConfig::new(sys.nt, sys.nr, sys.blocks).map_err(|e| {
        let key = match () {
            _ if sys.nt == 0 => "nt",
            _ if sys.nr == 0 => "nr",
            _ => "blocks",
        };
        fail("system", key, e.to_string())
    })?;

    let input = match file.input.kind {
        InputKind::Gaussian => {
            if file.input.constellation.is_some() || file.input.m.is_some() {
                return Err(fail(
                    "input",
                    "constellation",
                    "gaussian inputs take no constellation or m".into(),
                ));
            }
            ChannelInput::Gaussian
        }
        InputKind::Discrete => ChannelInput::Discrete(
            constellation(file.input.constellation.as_deref(), file.input.m)
                .map_err(|msg| fail("input", "constellation", msg))?,
        ),
    };

    let source = SourceModel::new(file.source.bandwidth_ratio)
        .map_err(|e| fail("source", "bandwidth_ratio", e.to_string()))?;
    let d0 = file.distortion.d0.unwrap_or(DEFAULT_D0);
    let distortion = DistortionSpec::new(file.distortion.target, d0).map_err(|e| {
        let key = if file.distortion.target > 0.0 && file.distortion.target <= 1.0 {
            "d0"
        } else {
            "target"
        };
        fail("distortion", key, e.to_string())
    })?;

    let (coding_rate, rate_source) = match &file.separation {
        None => (None, RateSource::Absent),
        Some(SeparationSection {
            rate: RateSpec::Named(name),
        }) if name == "optimal" => (
            Some(
                optimal_separation_rate(distortion.target, source.bandwidth_ratio)
                    .map_err(|e| fail("separation", "rate", e.to_string()))?,
            ),
            RateSource::Optimal,
        ),
        Some(SeparationSection {
            rate: RateSpec::Named(name),
        }) => {
            return Err(fail(
                "separation",
                "rate",
                format!("expected a number or \"optimal\", got \"{name}\""),
            ))
        }
        Some(SeparationSection {
            rate: RateSpec::Value(v),
        }) => {
            if !(*v >= 0.0) || !v.is_finite() {
                return Err(fail(
                    "separation",
                    "rate",
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
            (Some(*v), RateSource::Explicit)
        }
    };

    let (grid, trials, seed, confidence, sweep) = match &file.sweep {
        Some(sw) => {
            let grid = snr_grid_db(sw.snr_db_start, sw.snr_db_stop, sw.snr_db_step)
                .map_err(|e| fail("sweep", "snr_db_step", e.to_string()))?;
            if sw.trials == 0 {
                return Err(fail("sweep", "trials", "must be at least 1".into()));
            }
            let confidence = sw.confidence.unwrap_or(DEFAULT_CONFIDENCE);
            if !(confidence > 0.0 && confidence < 1.0) {
                return Err(fail(
                    "sweep",
                    "confidence",
                    format!("must lie in (0, 1), got {confidence}"),
                ));
            }
            let spec = SweepSpec {
                start_db: sw.snr_db_start,
                stop_db: sw.snr_db_stop,
                step_db: sw.snr_db_step,
            };
            (grid, sw.trials, sw.seed, confidence, Some(spec))
        }
        None => (vec![0.0], 1, 0, DEFAULT_CONFIDENCE, None),
    };

    let mut mi = MiEstimatorSettings::for_seed(seed);
    if let Some(n) = file.input.noise_samples {
        if n == 0 {
            return Err(fail("input", "noise_samples", "must be at least 1".into()));
        }
        mi.noise_samples = n;
    }

    let scenario = Scenario {
        config,
        input,
        source,
        distortion,
        coding_rate,
        snr_grid_db: grid,
        trials,
        seed,
        confidence,
        mi,
    };
    scenario.validate().map_err(|e| CliError::Scenario {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    Ok(LoadedScenario {
        scenario,
        rate_source,
        sweep,
    })
}

fn constellation(name: Option<&str>, m: Option<u32>) -> std::result::Result<Constellation, String> {
    let name = name.ok_or("discrete inputs need a constellation")?;
    let name = name.to_ascii_lowercase();
    let (family, implied) = match name.as_str() {
        "psk" => ("psk", None),
        "qam" => ("qam", None),
        "bpsk" => ("psk", Some(1)),
        "qpsk" => ("psk", Some(2)),
        "8psk" => ("psk", Some(3)),
        "16qam" => ("qam", Some(4)),
        "64qam" => ("qam", Some(6)),
        other => return Err(format!("unknown constellation \"{other}\"")),
    };
    let bits = match (implied, m) {
        (Some(i), Some(m)) if i != m => {
            return Err(format!("{name} carries {i} bits per symbol, but m = {m}"))
        }
        (Some(i), _) => i,
        (None, Some(m)) => m,
        (None, None) => return Err(format!("{name} needs m (bits per symbol)")),
    };
    let built = if family == "psk" {
        Constellation::psk(bits)
    } else {
        Constellation::qam(bits)
    };
    built.map_err(|e| e.to_string())
}

/// 1-based line of `key = ...` inside `[section]`, if present.
fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let mut inside = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            inside = line.split('#').next().map(str::trim) == Some(header.as_str());
            continue;
        }
        if inside {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    text.lines().position(|l| l.trim() == header).map(|i| i + 1)
}
