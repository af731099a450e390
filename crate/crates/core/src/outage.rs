//! Monte Carlo distortion-outage estimators and their exact oracles.
//!
//! Both estimators draw trial `t` from the channel stream `(seed, t)` and
//! evaluate `I_H(snr)` once per trial:
//!
//! * informed bound: outage when `I_H(snr) < R_s(D̄) / b`,
//! * separation at rate `R_c`: outage when `I_H(snr) <= R_c`, unless the
//!   source distortion alone already decides the event.
//!
//! A trial whose mutual information lands exactly on the informed threshold
//! is counted as an outage by both, so the two counts agree trial by trial
//! at `R_c = R_s(D̄) / b`.

use rayon::prelude::*;
use statrs::function::beta::beta_reg;

use crate::channel::{sample_channel, ChannelRealization, TrialStream};
use crate::error::{invalid, Result};
use crate::model::{admissible_rate_range, gaussian_rd_distortion, ChannelInput, Scenario};
use crate::mutual_info::{check_discrete_alphabet, instantaneous_mi, MiEstimatorSettings};

/// Outage probability estimate with an exact binomial interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub outage_count: u64,
}

impl OutageEstimate {
    pub fn from_counts(outage_count: u64, trials: u64, confidence: f64) -> Result<Self> {
        let (ci_low, ci_high) = binomial_ci(outage_count, trials, confidence)?;
        let p_hat = outage_count as f64 / trials as f64;
        Ok(Self {
            p_hat,
            // Keeps ci_low <= p_hat <= ci_high under rounding.
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
            trials,
            outage_count,
        })
    }

    pub fn ci_contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// How the separation outage event depends on the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparationRegime {
    /// `D_s(b R_c) > D̄`: the source code alone misses the target.
    SourceLimited,
    /// `D_s(b R_c) + d0 <= D̄`: even a channel error meets the target.
    AlwaysMet,
    /// Outage exactly when `I_H(snr) <= R_c`.
    ChannelLimited,
}

impl SeparationRegime {
    pub fn describe(&self) -> &'static str {
        match self {
            SeparationRegime::SourceLimited => "source-limited (outage probability 1)",
            SeparationRegime::AlwaysMet => "always-met (outage probability 0)",
            SeparationRegime::ChannelLimited => "channel-limited (outage iff I_H <= R_c)",
        }
    }
}

/// Classifies `rate` against the admissible range `[R_s(D̄)/b, R_s(D̄-d0)/b)`.
///
/// The comparison runs in the rate domain so that `R_c = R_s(D̄)/b` is
/// never misclassified by rounding in `2^(-2 b R_c)`.
pub fn separation_regime(
    target: f64,
    d0: f64,
    bandwidth_ratio: f64,
    rate: f64,
) -> Result<SeparationRegime> {
    if !(rate >= 0.0) {
        return invalid("coding rate", format!("must be >= 0, got {rate}"));
    }
    let range = admissible_rate_range(target, d0, bandwidth_ratio)?;
    Ok(if rate < range.low {
        SeparationRegime::SourceLimited
    } else if rate >= range.high {
        SeparationRegime::AlwaysMet
    } else {
        SeparationRegime::ChannelLimited
    })
}

/// Instantaneous informed-transmitter distortion `2^(-2 b I_H(snr))`.
pub fn informed_distortion(
    h: &ChannelRealization,
    snr: f64,
    bandwidth_ratio: f64,
    input: &ChannelInput,
    settings: &MiEstimatorSettings,
    trial_index: u64,
) -> Result<f64> {
    if !(bandwidth_ratio > 0.0) {
        return invalid(
            "bandwidth ratio",
            format!("must be positive, got {bandwidth_ratio}"),
        );
    }
    let mi = instantaneous_mi(h, snr, input, settings, trial_index)?;
    let rate = bandwidth_ratio * mi.bits;
    if rate.is_infinite() {
        return Ok(0.0);
    }
    // b * I can be NaN for b = inf and I = 0; a zero channel stays at D = 1.
    gaussian_rd_distortion(if rate.is_nan() { 0.0 } else { rate })
}

/// Outage counts over one SNR point, from a single MI evaluation per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Tally {
    pub trials: u64,
    pub informed: u64,
    pub separation: Option<u64>,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            informed: self.informed + other.informed,
            separation: self.separation.zip(other.separation).map(|(a, b)| a + b),
        }
    }
}

/// Counts outages over trials `0..scenario.trials` on the current rayon
/// pool. Trials are split into contiguous index ranges, one per thread;
/// the merge is an integer sum, so the result does not depend on the split.
pub(crate) fn tally(scenario: &Scenario, snr: f64) -> Result<Tally> {
    scenario.validate()?;
    if !(snr >= 0.0) || !snr.is_finite() {
        return invalid("snr", format!("must be finite and >= 0, got {snr}"));
    }
    if let ChannelInput::Discrete(c) = &scenario.input {
        check_discrete_alphabet(c, scenario.config.n_t)?;
    }
    let threshold = scenario.informed_threshold()?;
    let regime = scenario
        .coding_rate
        .map(|rate| {
            separation_regime(
                scenario.distortion.target,
                scenario.distortion.d0,
                scenario.source.bandwidth_ratio,
                rate,
            )
            .map(|regime| (regime, rate))
        })
        .transpose()?;

    let trials = scenario.trials;
    let chunks = (rayon::current_num_threads() as u64).clamp(1, trials);
    let bounds = |c: u64| (trials * c / chunks, trials * (c + 1) / chunks);

    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let (start, end) = bounds(c);
            let mut informed = 0u64;
            let mut separation = 0u64;
            for t in start..end {
                let h = sample_channel(&scenario.config, TrialStream::new(scenario.seed, t))?;
                let mi = instantaneous_mi(&h, snr, &scenario.input, &scenario.mi, t)?.bits;
                // Ties with the threshold count as outage (see module docs).
                if mi <= threshold {
                    informed += 1;
                }
                match regime {
                    Some((SeparationRegime::SourceLimited, _)) => separation += 1,
                    Some((SeparationRegime::ChannelLimited, rate)) if mi <= rate => separation += 1,
                    _ => {}
                }
            }
            Ok(Tally {
                trials: end - start,
                informed,
                separation: regime.map(|_| separation),
            })
        })
        .try_reduce(
            || Tally {
                trials: 0,
                informed: 0,
                separation: regime.map(|_| 0),
            },
            |a, b| Ok(a.merge(b)),
        )
}

/// Transmitter-informed lower bound `Pr{I_H(snr) < R_s(D̄)/b}` at linear `snr`.
pub fn informed_outage_mc(scenario: &Scenario, snr: f64) -> Result<OutageEstimate> {
    let t = tally(scenario, snr)?;
    OutageEstimate::from_counts(t.informed, t.trials, scenario.confidence)
}

/// Separation upper bound at the scenario's coding rate and linear `snr`.
pub fn separation_outage_mc(scenario: &Scenario, snr: f64) -> Result<OutageEstimate> {
    if scenario.coding_rate.is_none() {
        return invalid("coding rate", "separation estimate needs a coding rate");
    }
    let t = tally(scenario, snr)?;
    OutageEstimate::from_counts(
        t.separation.expect("coding rate checked above"),
        t.trials,
        scenario.confidence,
    )
}

/// Exact SISO Rayleigh information outage `1 - exp(-(2^R - 1) / snr)`.
pub fn siso_gaussian_outage_closed_form(snr: f64, rate: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return invalid("snr", format!("must be positive, got {snr}"));
    }
    if !(rate >= 0.0) {
        return invalid("rate", format!("must be >= 0, got {rate}"));
    }
    // 2^R - 1 and 1 - exp(-x), both without cancellation near zero.
    let gap = (rate * std::f64::consts::LN_2).exp_m1();
    Ok(-(-gap / snr).exp_m1())
}

/// Exact (Clopper–Pearson) two-sided binomial interval.
pub fn binomial_ci(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return invalid("trials", "must be at least 1");
    }
    if successes > trials {
        return invalid(
            "successes",
            format!("{successes} exceeds trial count {trials}"),
        );
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return invalid(
            "confidence",
            format!("must lie in (0, 1), got {confidence}"),
        );
    }
    let alpha = 1.0 - confidence;
    let k = successes as f64;
    let n = trials as f64;
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, k, n - k + 1.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, k + 1.0, n - k)
    };
    Ok((low, high))
}

/// Inverts the regularized incomplete beta function by bisection.
fn beta_quantile(q: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DistortionSpec, SourceModel, SystemConfig};
    use num_complex::Complex64;

    fn siso(target: f64, b: f64, trials: u64) -> Scenario {
        Scenario::new(
            SystemConfig::new(1, 1, 1).unwrap(),
            ChannelInput::Gaussian,
            SourceModel::new(b).unwrap(),
            DistortionSpec::new(target, 0.5).unwrap(),
            vec![10.0],
            trials,
            2024,
        )
        .unwrap()
    }

    #[test]
    fn informed_distortion_examples() {
        let s = MiEstimatorSettings::default();
        let zero = ChannelRealization::scalar(Complex64::new(0.0, 0.0));
        let one = ChannelRealization::scalar(Complex64::new(1.0, 0.0));
        let g = ChannelInput::Gaussian;
        assert_eq!(
            informed_distortion(&zero, 5.0, 2.0, &g, &s, 0).unwrap(),
            1.0
        );
        assert!((informed_distortion(&one, 1.0, 2.0, &g, &s, 0).unwrap() - 0.0625).abs() < 1e-15);
        assert_eq!(
            informed_distortion(&one, 1.0, f64::INFINITY, &g, &s, 0).unwrap(),
            0.0
        );
        assert!(informed_distortion(&one, 1.0, 1e6, &g, &s, 0).unwrap() < 1e-300);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(siso_gaussian_outage_closed_form(3.0, 0.0).unwrap(), 0.0);
        let p = siso_gaussian_outage_closed_form(10.0, 1.0).unwrap();
        assert!((p - 0.0951626).abs() < 1e-7, "{p}");
        assert!(siso_gaussian_outage_closed_form(1e12, 1.0).unwrap() < 1e-11);
        assert!(siso_gaussian_outage_closed_form(0.0, 1.0).is_err());
    }

    #[test]
    fn binomial_ci_boundaries() {
        let n = 37;
        let (lo, hi) = binomial_ci(0, n, 0.9).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.05f64.powf(1.0 / n as f64))).abs() < 1e-12);
        let (lo, hi) = binomial_ci(n, n, 0.9).unwrap();
        assert_eq!(hi, 1.0);
        assert!((lo - 0.05f64.powf(1.0 / n as f64)).abs() < 1e-12);
        assert!(binomial_ci(5, 4, 0.9).is_err());
        assert!(binomial_ci(0, 0, 0.9).is_err());
        assert!(binomial_ci(1, 4, 1.0).is_err());
    }

    #[test]
    fn target_one_never_outages() {
        let s = siso(1.0, 1.0, 2000);
        let est = informed_outage_mc(&s, 10.0).unwrap();
        assert_eq!(est.outage_count, 0);
    }

    #[test]
    fn zero_snr_always_outages() {
        let s = siso(0.25, 1.0, 500);
        assert_eq!(informed_outage_mc(&s, 0.0).unwrap().p_hat, 1.0);
    }

    #[test]
    fn separation_regimes() {
        // R_s(0.25) = 1, b = 1: admissible range [1, R_s(0.25 - d0)) = [1, inf).
        let base = siso(0.25, 1.0, 300);
        let low = base.clone().with_coding_rate(0.5).unwrap();
        for snr in [0.1, 10.0, 1e4] {
            assert_eq!(separation_outage_mc(&low, snr).unwrap().p_hat, 1.0);
        }
        assert_eq!(
            separation_regime(0.9, 0.4, 1.0, 0.5).unwrap(),
            SeparationRegime::AlwaysMet
        );
        let mut met = siso(0.9, 1.0, 300).with_coding_rate(0.6).unwrap();
        met.distortion.d0 = 0.4;
        for snr in [0.1, 10.0] {
            assert_eq!(separation_outage_mc(&met, snr).unwrap().p_hat, 0.0);
        }
        assert_eq!(
            separation_regime(0.25, 0.5, 1.0, 1.0).unwrap(),
            SeparationRegime::ChannelLimited
        );
        assert!(separation_outage_mc(&base, 1.0).is_err());
    }

    #[test]
    fn optimal_rate_matches_informed_counts() {
        let s = siso(0.05, 2.0, 5000).with_optimal_rate().unwrap();
        for snr in [0.5, 2.0, 10.0, 50.0] {
            let t = tally(&s, snr).unwrap();
            assert_eq!(Some(t.informed), t.separation);
        }
    }

    #[test]
    fn counts_do_not_depend_on_thread_count() {
        let s = siso(0.25, 1.0, 4001).with_coding_rate(1.3).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| tally(&s, 7.0).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }
}
