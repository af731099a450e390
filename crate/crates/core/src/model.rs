//! Domain types and the rate-distortion algebra of the unit-variance
//! Gaussian source under quadratic distortion.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::mutual_info::MiEstimatorSettings;

/// Default bound on the mean squared error after a channel decoding failure.
pub const DEFAULT_D0: f64 = 0.5;

/// Default confidence level of reported binomial intervals.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Antenna counts and number of independent fading blocks per codeword.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SystemConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub blocks: usize,
}

impl SystemConfig {
    pub fn new(n_t: usize, n_r: usize, blocks: usize) -> Result<Self> {
        let config = Self { n_t, n_r, blocks };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 {
            return invalid("n_t", "transmit antenna count must be at least 1");
        }
        if self.n_r == 0 {
            return invalid("n_r", "receive antenna count must be at least 1");
        }
        if self.blocks == 0 {
            return invalid("blocks", "fading block count must be at least 1");
        }
        Ok(())
    }

    /// `N * n_t * n_r`, the largest achievable SNR exponent.
    pub fn full_diversity(&self) -> usize {
        self.blocks * self.n_t * self.n_r
    }

    pub fn min_antennas(&self) -> usize {
        self.n_t.min(self.n_r)
    }
}

/// A finite, uniformly used signal set with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    label: String,
    points: Vec<Complex64>,
    bits: u32,
}

impl Constellation {
    /// Wraps an explicit point set. The point count must be a power of two
    /// and the mean energy must be 1 within `1e-12`.
    pub fn new(label: impl Into<String>, points: Vec<Complex64>) -> Result<Self> {
        let n = points.len();
        if n < 2 || !n.is_power_of_two() {
            return invalid(
                "constellation",
                format!("point count must be a power of two >= 2, got {n}"),
            );
        }
        if points
            .iter()
            .any(|p| !p.re.is_finite() || !p.im.is_finite())
        {
            return invalid("constellation", "points must be finite");
        }
        let energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / n as f64;
        if (energy - 1.0).abs() > 1e-12 {
            return invalid(
                "constellation",
                format!("mean energy must be 1, got {energy}"),
            );
        }
        Ok(Self {
            label: label.into(),
            bits: n.trailing_zeros(),
            points,
        })
    }

    /// `2^m`-ary phase shift keying on the unit circle. `m = 1` is BPSK.
    pub fn psk(m: u32) -> Result<Self> {
        if !(1..=12).contains(&m) {
            return invalid("m", format!("PSK order must be in 1..=12 bits, got {m}"));
        }
        let size = 1usize << m;
        let points = (0..size)
            .map(|k| {
                Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / size as f64)
            })
            .collect();
        let label = match m {
            1 => "BPSK".to_string(),
            2 => "QPSK".to_string(),
            _ => format!("{size}-PSK"),
        };
        Self::new(label, points)
    }

    /// Square `2^m`-QAM with odd-integer levels, scaled to unit energy.
    pub fn qam(m: u32) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(2) || m > 12 {
            return invalid(
                "m",
                format!("square QAM needs an even number of bits in 2..=12, got {m}"),
            );
        }
        let side = 1usize << (m / 2);
        let size = side * side;
        let scale = (2.0 * (size as f64 - 1.0) / 3.0).sqrt();
        let level = |i: usize| (2.0 * i as f64 - (side as f64 - 1.0)) / scale;
        let points = (0..side)
            .flat_map(|i| (0..side).map(move |q| Complex64::new(level(i), level(q))))
            .collect();
        Self::new(format!("{size}-QAM"), points)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// `m = log2 |X|`.
    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }
}

/// Channel input distribution of the random code ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelInput {
    Gaussian,
    Discrete(Constellation),
}

impl ChannelInput {
    /// Bits per symbol for discrete inputs, `None` for Gaussian inputs.
    pub fn bits_per_symbol(&self) -> Option<u32> {
        match self {
            ChannelInput::Gaussian => None,
            ChannelInput::Discrete(c) => Some(c.bits_per_symbol()),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            ChannelInput::Gaussian => "gaussian",
            ChannelInput::Discrete(c) => c.label(),
        }
    }
}

/// Unit-variance Gaussian source with bandwidth ratio `b` channel uses per
/// source symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    pub bandwidth_ratio: f64,
}

impl SourceModel {
    pub fn new(bandwidth_ratio: f64) -> Result<Self> {
        let source = Self { bandwidth_ratio };
        source.validate()?;
        Ok(source)
    }

    pub fn validate(&self) -> Result<()> {
        check_bandwidth_ratio(self.bandwidth_ratio)
    }
}

/// Target distortion and the separation distortion penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionSpec {
    pub target: f64,
    pub d0: f64,
}

impl DistortionSpec {
    pub fn new(target: f64, d0: f64) -> Result<Self> {
        let spec = Self { target, d0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        check_distortion(self.target)?;
        check_d0(self.d0)
    }
}

/// Everything needed to run one outage experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SystemConfig,
    pub input: ChannelInput,
    pub source: SourceModel,
    pub distortion: DistortionSpec,
    /// Separation coding rate in bits per channel use. `None` skips the
    /// separation estimator.
    pub coding_rate: Option<f64>,
    pub snr_grid_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub confidence: f64,
    pub mi: MiEstimatorSettings,
}

impl Scenario {
    /// Scenario with default confidence, MI settings derived from `seed`,
    /// and no separation rate.
    pub fn new(
        config: SystemConfig,
        input: ChannelInput,
        source: SourceModel,
        distortion: DistortionSpec,
        snr_grid_db: Vec<f64>,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        let scenario = Self {
            config,
            input,
            source,
            distortion,
            coding_rate: None,
            snr_grid_db,
            trials,
            seed,
            confidence: DEFAULT_CONFIDENCE,
            mi: MiEstimatorSettings::for_seed(seed),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn with_coding_rate(mut self, rate: f64) -> Result<Self> {
        self.coding_rate = Some(rate);
        self.validate()?;
        Ok(self)
    }

    /// Uses `R_c* = R_s(D̄) / b` as the separation rate.
    pub fn with_optimal_rate(self) -> Result<Self> {
        let rate = optimal_separation_rate(self.distortion.target, self.source.bandwidth_ratio)?;
        self.with_coding_rate(rate)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.source.validate()?;
        self.distortion.validate()?;
        self.mi.validate()?;
        if let Some(rate) = self.coding_rate {
            if !(rate >= 0.0) || !rate.is_finite() {
                return invalid(
                    "coding rate",
                    format!("must be finite and >= 0, got {rate}"),
                );
            }
        }
        if self.snr_grid_db.is_empty() {
            return invalid("snr grid", "must contain at least one point");
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return invalid("snr grid", "values must be finite");
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("snr grid", "must be strictly increasing");
        }
        if self.trials == 0 {
            return invalid("trials", "must be at least 1");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return invalid(
                "confidence",
                format!("must lie in (0, 1), got {}", self.confidence),
            );
        }
        Ok(())
    }

    /// Information-outage threshold of the informed bound, `R_s(D̄) / b`.
    pub fn informed_threshold(&self) -> Result<f64> {
        optimal_separation_rate(self.distortion.target, self.source.bandwidth_ratio)
    }
}

/// SNR grid `start, start + step, ...` up to and including `stop`.
pub fn snr_grid_db(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() {
        return invalid("snr grid", "bounds must be finite");
    }
    if !(step > 0.0) || !step.is_finite() {
        return invalid("snr grid", format!("step must be positive, got {step}"));
    }
    if stop < start {
        return invalid("snr grid", format!("stop {stop} is below start {start}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Distortion-rate function `D(R) = 2^(-2R)`.
pub fn gaussian_rd_distortion(rate: f64) -> Result<f64> {
    if !(rate >= 0.0) {
        return invalid("rate", format!("must be >= 0, got {rate}"));
    }
    Ok((-2.0 * rate).exp2())
}

/// Rate-distortion function `R(D) = -log2(D) / 2` on `(0, 1]`.
pub fn gaussian_rd_rate(distortion: f64) -> Result<f64> {
    check_distortion(distortion)?;
    // -0.0 at D = 1 would print oddly.
    Ok((-distortion.log2() / 2.0).max(0.0))
}

/// Separation rate that makes the separation outage event coincide with
/// the informed outage event: `R_c* = R_s(D̄) / b`.
pub fn optimal_separation_rate(target: f64, bandwidth_ratio: f64) -> Result<f64> {
    check_bandwidth_ratio(bandwidth_ratio)?;
    Ok(gaussian_rd_rate(target)? / bandwidth_ratio)
}

/// Half-open interval `[low, high)` of coding rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRange {
    pub low: f64,
    pub high: f64,
}

impl RateRange {
    pub fn contains(&self, rate: f64) -> bool {
        rate >= self.low && rate < self.high
    }

    pub fn is_bounded(&self) -> bool {
        self.high.is_finite()
    }
}

/// Coding rates for which `D_s(b R_c) <= D̄ < D_s(b R_c) + d0`.
///
/// The upper end is `+inf` when `D̄ <= d0`, since then any channel error
/// already violates the target.
pub fn admissible_rate_range(target: f64, d0: f64, bandwidth_ratio: f64) -> Result<RateRange> {
    check_d0(d0)?;
    let low = optimal_separation_rate(target, bandwidth_ratio)?;
    let slack = target - d0;
    let high = if slack > 0.0 {
        gaussian_rd_rate(slack)? / bandwidth_ratio
    } else {
        f64::INFINITY
    };
    Ok(RateRange { low, high })
}

fn check_distortion(d: f64) -> Result<()> {
    if !(d > 0.0 && d <= 1.0) {
        return invalid("target distortion", format!("must lie in (0, 1], got {d}"));
    }
    Ok(())
}

fn check_d0(d0: f64) -> Result<()> {
    if !(d0 > 0.0) || !d0.is_finite() {
        return invalid("d0", format!("must be positive and finite, got {d0}"));
    }
    Ok(())
}

fn check_bandwidth_ratio(b: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return invalid(
            "bandwidth ratio",
            format!("must be positive and finite, got {b}"),
        );
    }
    Ok(())
}
