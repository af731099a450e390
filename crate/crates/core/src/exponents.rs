//! Closed-form SNR exponents and the empirical log-log slope estimator.
//!
//! For Gaussian inputs both the informed bound and separation reach the
//! full diversity `N n_t n_r`. For discrete inputs with `m` bits per symbol
//! both are limited by the Singleton bound `n_r (1 + floor(N (n_t - R/m)))`,
//! evaluated at `R = R_s(D̄)/b` for the informed bound and at `R = R_c` for
//! separation.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::model::{gaussian_rd_rate, optimal_separation_rate, ChannelInput, SystemConfig};

/// Distance to an integer below which the Singleton floor snaps to it.
pub const FLOOR_SNAP: f64 = 1e-9;

const ORACLE_GRID_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentRegime {
    FullDiversity,
    SingletonLimited,
    /// Expected-distortion exponent limited by the bandwidth ratio.
    BandwidthLimited,
    /// Segment `j` of the expected-distortion separation formula.
    TradeoffSegment(usize),
    Zero,
}

impl fmt::Display for ExponentRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExponentRegime::FullDiversity => f.write_str("full-diversity"),
            ExponentRegime::SingletonLimited => f.write_str("singleton-limited"),
            ExponentRegime::BandwidthLimited => f.write_str("bandwidth-limited"),
            ExponentRegime::TradeoffSegment(j) => write!(f, "segment-{j}"),
            ExponentRegime::Zero => f.write_str("zero"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentResult {
    pub value: f64,
    pub regime: ExponentRegime,
}

impl ExponentResult {
    fn full(config: &SystemConfig) -> Self {
        Self {
            value: config.full_diversity() as f64,
            regime: ExponentRegime::FullDiversity,
        }
    }
}

/// Singleton-bound exponent for rate `rate` with `m` bits per symbol.
///
/// Rates at or above `m n_t` give 0 (the discrete-input mutual information
/// never reaches `m n_t`), and the value is capped at `N n_t n_r`.
pub fn singleton_exponent(
    config: &SystemConfig,
    bits_per_symbol: u32,
    rate: f64,
) -> Result<ExponentResult> {
    config.validate()?;
    if bits_per_symbol == 0 {
        return invalid("m", "bits per symbol must be at least 1");
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return invalid("rate", format!("must be finite and >= 0, got {rate}"));
    }
    let m = bits_per_symbol as f64;
    let x = config.blocks as f64 * (config.n_t as f64 - rate / m);
    let nearest = x.round();
    let x = if (x - nearest).abs() < FLOOR_SNAP {
        nearest
    } else {
        x
    };
    if x <= 0.0 {
        return Ok(ExponentResult {
            value: 0.0,
            regime: ExponentRegime::Zero,
        });
    }
    let value = (config.n_r as f64 * (1.0 + x.floor())).min(config.full_diversity() as f64);
    let regime = if value == config.full_diversity() as f64 {
        ExponentRegime::FullDiversity
    } else {
        ExponentRegime::SingletonLimited
    };
    Ok(ExponentResult { value, regime })
}

/// Exponent of the transmitter-informed lower bound.
pub fn informed_exponent(
    config: &SystemConfig,
    input: &ChannelInput,
    bandwidth_ratio: f64,
    target: f64,
) -> Result<ExponentResult> {
    config.validate()?;
    let rate = optimal_separation_rate(target, bandwidth_ratio)?;
    match input {
        ChannelInput::Gaussian => Ok(ExponentResult::full(config)),
        ChannelInput::Discrete(c) => singleton_exponent(config, c.bits_per_symbol(), rate),
    }
}

/// Exponent of tandem separation at coding rate `rate`.
pub fn separation_exponent(
    config: &SystemConfig,
    input: &ChannelInput,
    rate: f64,
) -> Result<ExponentResult> {
    config.validate()?;
    if !(rate >= 0.0) || !rate.is_finite() {
        return invalid(
            "coding rate",
            format!("must be finite and >= 0, got {rate}"),
        );
    }
    match input {
        ChannelInput::Gaussian => Ok(ExponentResult::full(config)),
        ChannelInput::Discrete(c) => singleton_exponent(config, c.bits_per_symbol(), rate),
    }
}

/// `N (n_t - k)(n_r - k)` at an integer multiplexing gain `k`.
fn tradeoff_anchor(config: &SystemConfig, k: usize) -> f64 {
    (config.blocks * (config.n_t - k) * (config.n_r - k)) as f64
}

/// Diversity-multiplexing tradeoff: piecewise-linear interpolation of
/// `N (n_t - k)(n_r - k)` between consecutive integers `k`.
pub fn dmt_curve(config: &SystemConfig, gain: f64) -> Result<f64> {
    config.validate()?;
    let top = config.min_antennas() as f64;
    if !(0.0..=top).contains(&gain) {
        return invalid(
            "multiplexing gain",
            format!("must lie in [0, {top}], got {gain}"),
        );
    }
    let k = (gain.floor() as usize).min(config.min_antennas() - 1);
    let frac = gain - k as f64;
    let left = tradeoff_anchor(config, k);
    let right = tradeoff_anchor(config, k + 1);
    Ok(left + frac * (right - left))
}

/// Expected-distortion exponent of the informed bound with Gaussian inputs,
/// `N sum_{i=1}^{min(n_t, n_r)} min{2b/N, 2i - 1 + |n_t - n_r|}`.
pub fn expected_tx_exponent(config: &SystemConfig, bandwidth_ratio: f64) -> Result<ExponentResult> {
    config.validate()?;
    if !(bandwidth_ratio > 0.0) {
        return invalid(
            "bandwidth ratio",
            format!("must be positive, got {bandwidth_ratio}"),
        );
    }
    let n = config.blocks as f64;
    let gap = config.n_t.abs_diff(config.n_r) as f64;
    let cap = 2.0 * bandwidth_ratio / n;
    let value = n
        * (1..=config.min_antennas())
            .map(|i| cap.min(2.0 * i as f64 - 1.0 + gap))
            .sum::<f64>();
    let saturated = cap >= 2.0 * config.min_antennas() as f64 - 1.0 + gap;
    Ok(ExponentResult {
        value,
        regime: if saturated {
            ExponentRegime::FullDiversity
        } else {
            ExponentRegime::BandwidthLimited
        },
    })
}

/// Expected-distortion exponent of separation, reported two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedSeparationExponent {
    /// Segment formula `N 2b (j d(j-1) - (j-1) d(j)) / (2b + d(j-1) - d(j))`
    /// with `d(k) = N (n_r - k)(n_t - k)`.
    pub formula: ExponentResult,
    /// `max_r min{2 b r, dmt_curve(r)}` by grid search and bisection.
    pub oracle: f64,
    pub segment: usize,
}

/// Segment `j` whose interval `[2(j-1)/d(j-1), 2j/d(j))` contains `1/b`.
fn tradeoff_segment(config: &SystemConfig, inverse_b: f64) -> usize {
    let last = config.min_antennas();
    (1..=last)
        .find(|&j| {
            let lo = 2.0 * (j - 1) as f64 / tradeoff_anchor(config, j - 1);
            let d_j = tradeoff_anchor(config, j);
            let hi = if d_j > 0.0 {
                2.0 * j as f64 / d_j
            } else {
                f64::INFINITY
            };
            inverse_b >= lo && inverse_b < hi
        })
        .unwrap_or(last)
}

pub fn expected_sep_exponent(
    config: &SystemConfig,
    bandwidth_ratio: f64,
) -> Result<ExpectedSeparationExponent> {
    config.validate()?;
    if !(bandwidth_ratio > 0.0) || !bandwidth_ratio.is_finite() {
        return invalid(
            "bandwidth ratio",
            format!("must be positive and finite, got {bandwidth_ratio}"),
        );
    }
    let b2 = 2.0 * bandwidth_ratio;
    let j = tradeoff_segment(config, 1.0 / bandwidth_ratio);
    let prev = tradeoff_anchor(config, j - 1);
    let next = tradeoff_anchor(config, j);
    let jf = j as f64;
    let value = config.blocks as f64 * b2 * (jf * prev - (jf - 1.0) * next) / (b2 + prev - next);
    Ok(ExpectedSeparationExponent {
        formula: ExponentResult {
            value,
            regime: ExponentRegime::TradeoffSegment(j),
        },
        oracle: variational_separation_exponent(config, bandwidth_ratio)?,
        segment: j,
    })
}

/// `max_{r in [0, min(n_t, n_r)]} min{2 b r, dmt_curve(r)}`.
///
/// `2br - dmt_curve(r)` is strictly increasing, so the maximum sits at its
/// unique root: a uniform grid brackets it and bisection refines it.
fn variational_separation_exponent(config: &SystemConfig, bandwidth_ratio: f64) -> Result<f64> {
    let top = config.min_antennas() as f64;
    let gap = |r: f64| -> Result<f64> { Ok(2.0 * bandwidth_ratio * r - dmt_curve(config, r)?) };
    let step = top / ORACLE_GRID_POINTS as f64;
    let mut hi_idx = ORACLE_GRID_POINTS;
    for i in 1..=ORACLE_GRID_POINTS {
        if gap(i as f64 * step)? >= 0.0 {
            hi_idx = i;
            break;
        }
    }
    let (mut lo, mut hi) = ((hi_idx - 1) as f64 * step, (hi_idx as f64 * step).min(top));
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    Ok((2.0 * bandwidth_ratio * r).min(dmt_curve(config, r)?))
}

/// Smallest bandwidth ratio for which `R_s(D̄)/b <= m`, i.e.
/// `b >= -log2(D̄) / (2m)`.
pub fn min_bandwidth_ratio(target: f64, bits_per_symbol: u32) -> Result<f64> {
    if bits_per_symbol == 0 {
        return invalid("m", "bits per symbol must be at least 1");
    }
    Ok(gaussian_rd_rate(target)? / bits_per_symbol as f64)
}

/// Unweighted least-squares fit of `-log10 p` against `log10 snr`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in decades.
    pub residual: f64,
    pub points: usize,
}

/// High-SNR slope of an outage curve. `points` are `(snr_linear, p_hat)`
/// pairs; zero probabilities must be filtered out by the caller.
pub fn empirical_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    for &(snr, p) in points {
        if !(snr > 0.0) || !snr.is_finite() {
            return invalid(
                "snr",
                format!("slope points need positive finite SNR, got {snr}"),
            );
        }
        if !(p > 0.0 && p <= 1.0) {
            return invalid(
                "probability",
                format!("slope points need p in (0, 1], got {p}"),
            );
        }
    }
    let n = points.len();
    if n < 2 {
        return Err(Error::DegenerateRegression(n));
    }
    let xs: Vec<f64> = points.iter().map(|&(s, _)| s.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| -p.log10()).collect();
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateRegression(1));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (sse / n as f64).sqrt(),
        points: n,
    })
}
