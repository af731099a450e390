//! Instantaneous mutual information `I_H(snr)` of the block-fading channel
//! `Y_i = sqrt(snr / n_t) H_i X_i + Z_i`, averaged over the `N` blocks.
//!
//! Gaussian inputs use the log-determinant formula evaluated through a
//! Cholesky factor of the smaller Gram matrix. Discrete inputs use the
//! uniform-input coded-modulation mutual information
//!
//! ```text
//! m n_t - 1/|X|^n_t  sum_x E_z log2 sum_x' exp(|z|^2 - |sqrt(snr/n_t) H (x - x') + z|^2)
//! ```
//!
//! with the noise expectation replaced by a Monte Carlo average. All sums
//! run in nats; results are converted to bits on return.

use std::f64::consts::LN_2;

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;

use crate::channel::{complex_normal, ChannelRealization, TrialStream};
use crate::error::{invalid, Error, Result};
use crate::model::{ChannelInput, Constellation};

/// Largest joint input alphabet `|X|^n_t` the discrete estimator enumerates.
pub const MAX_JOINT_ALPHABET: u128 = 1 << 16;

pub const DEFAULT_NOISE_SAMPLES: usize = 2000;

/// Offset mixed into a scenario seed to key the inner noise sampler, so the
/// noise stream never coincides with the channel stream.
const MI_SEED_OFFSET: u64 = 0x9e37_79b9_7f4a_7c15;

/// Inner Monte Carlo settings of the discrete-input estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MiEstimatorSettings {
    /// Noise draws per (block, joint input vector).
    pub noise_samples: usize,
    pub mi_seed: u64,
}

impl MiEstimatorSettings {
    pub fn for_seed(seed: u64) -> Self {
        Self {
            noise_samples: DEFAULT_NOISE_SAMPLES,
            mi_seed: seed ^ MI_SEED_OFFSET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.noise_samples == 0 {
            return invalid("noise_samples", "must be at least 1");
        }
        Ok(())
    }
}

impl Default for MiEstimatorSettings {
    fn default() -> Self {
        Self::for_seed(0)
    }
}

/// Mutual information in bits per channel use, with the standard error of
/// the Monte Carlo estimate (zero for exact evaluations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Estimate clamped to `[0, m n_t]`.
    pub bits: f64,
    /// Estimate before clamping.
    pub unclamped_bits: f64,
    pub std_error: f64,
}

impl MiEstimate {
    fn exact(bits: f64) -> Self {
        Self {
            bits,
            unclamped_bits: bits,
            std_error: 0.0,
        }
    }
}

fn check_snr(snr: f64) -> Result<()> {
    if !(snr >= 0.0) || !snr.is_finite() {
        return invalid("snr", format!("must be finite and >= 0, got {snr}"));
    }
    Ok(())
}

/// `ln det(I + (snr / n_t) H H^H)` for one block.
fn block_log_det(h: &DMatrix<Complex64>, snr: f64) -> Result<f64> {
    let scale = snr / h.ncols() as f64;
    if h.shape() == (1, 1) {
        return Ok((scale * h[(0, 0)].norm_sqr()).ln_1p());
    }
    // det(I + s H H^H) = det(I + s H^H H); factor whichever is smaller.
    let gram = if h.nrows() <= h.ncols() {
        h * h.adjoint()
    } else {
        h.adjoint() * h
    };
    let n = gram.nrows();
    let m = DMatrix::identity(n, n) + gram * Complex64::from(scale);
    let chol = Cholesky::new(m).ok_or_else(|| Error::InvalidParameter {
        name: "channel",
        reason: "Gram matrix is not positive definite".into(),
    })?;
    let l = chol.l_dirty();
    Ok(2.0 * (0..n).map(|i| l[(i, i)].re.ln()).sum::<f64>())
}

/// `(1/N) sum_i log2 det(I + (snr / n_t) H_i H_i^H)`.
pub fn gaussian_input_mi(h: &ChannelRealization, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let mut nats = 0.0;
    for block in h.blocks() {
        nats += block_log_det(block, snr)?;
    }
    Ok(nats / (h.block_count() as f64 * LN_2))
}

/// All `|X|^n_t` joint input vectors, index-major in antenna order.
fn joint_vectors(constellation: &Constellation, n_t: usize) -> Result<Vec<Vec<Complex64>>> {
    check_discrete_alphabet(constellation, n_t)?;
    let points = constellation.points();
    let q = points.len();
    Ok((0..q.pow(n_t as u32))
        .map(|mut idx| {
            (0..n_t)
                .map(|_| {
                    let p = points[idx % q];
                    idx /= q;
                    p
                })
                .collect()
        })
        .collect())
}

/// Checks that the discrete estimator can run for this shape.
pub fn check_discrete_alphabet(constellation: &Constellation, n_t: usize) -> Result<()> {
    let q = constellation.points().len() as u128;
    let size = q.checked_pow(n_t as u32).unwrap_or(u128::MAX);
    if size > MAX_JOINT_ALPHABET {
        return Err(Error::AlphabetTooLarge {
            size,
            limit: MAX_JOINT_ALPHABET,
        });
    }
    Ok(())
}

/// Coded-modulation mutual information for uniform inputs drawn from
/// `constellation` on every transmit antenna.
///
/// The noise draws come from the stream `(settings.mi_seed, trial_index)`,
/// consumed block by block, then input vector by input vector.
pub fn discrete_input_mi(
    h: &ChannelRealization,
    snr: f64,
    constellation: &Constellation,
    settings: &MiEstimatorSettings,
    trial_index: u64,
) -> Result<MiEstimate> {
    check_snr(snr)?;
    settings.validate()?;
    let n_t = h.n_t();
    let n_r = h.n_r();
    let vectors = joint_vectors(constellation, n_t)?;
    let k = vectors.len();
    let samples = settings.noise_samples;
    let amplitude = (snr / n_t as f64).sqrt();
    // ln |X|^n_t, computed the same way log_sum_exp sums k unit terms.
    let full_rate = (k as f64).ln();
    let mut rng = TrialStream::new(settings.mi_seed, trial_index).rng();

    let mut nats = 0.0;
    let mut variance = 0.0;
    let mut received = vec![Complex64::new(0.0, 0.0); k * n_r];
    let mut exponents = vec![0.0; k];
    let mut noise = vec![Complex64::new(0.0, 0.0); n_r];

    for block in h.blocks() {
        // Noiseless received points sqrt(snr/n_t) H x for every joint vector.
        for (x, out) in vectors.iter().zip(received.chunks_exact_mut(n_r)) {
            for (r, o) in out.iter_mut().enumerate() {
                *o = (0..n_t).map(|t| block[(r, t)] * x[t]).sum::<Complex64>() * amplitude;
            }
        }

        let mut block_mean = 0.0;
        let mut block_var = 0.0;
        for sent in received.chunks_exact(n_r) {
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for j in 0..samples {
                noise.iter_mut().for_each(|z| *z = complex_normal(&mut rng));
                let noise_energy: f64 = noise.iter().map(|z| z.norm_sqr()).sum();
                for (e, other) in exponents.iter_mut().zip(received.chunks_exact(n_r)) {
                    let dist: f64 = sent
                        .iter()
                        .zip(other)
                        .zip(&noise)
                        .map(|((s, o), z)| (s - o + z).norm_sqr())
                        .sum();
                    *e = noise_energy - dist;
                }
                let term = full_rate - log_sum_exp(&exponents);
                let delta = term - mean;
                mean += delta / (j + 1) as f64;
                m2 += delta * (term - mean);
            }
            block_mean += mean;
            if samples > 1 {
                block_var += m2 / (samples - 1) as f64 / samples as f64;
            }
        }
        nats += block_mean / k as f64;
        variance += block_var / (k * k) as f64;
    }

    let blocks = h.block_count() as f64;
    let unclamped_bits = nats / blocks / LN_2;
    let std_error = variance.sqrt() / blocks / LN_2;
    let cap = (constellation.bits_per_symbol() as usize * n_t) as f64;
    Ok(MiEstimate {
        bits: unclamped_bits.clamp(0.0, cap),
        unclamped_bits,
        std_error,
    })
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Mutual information for whichever input model `input` describes.
pub fn instantaneous_mi(
    h: &ChannelRealization,
    snr: f64,
    input: &ChannelInput,
    settings: &MiEstimatorSettings,
    trial_index: u64,
) -> Result<MiEstimate> {
    match input {
        ChannelInput::Gaussian => gaussian_input_mi(h, snr).map(MiEstimate::exact),
        ChannelInput::Discrete(c) => discrete_input_mi(h, snr, c, settings, trial_index),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::model::SystemConfig;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_channel_has_zero_mi() {
        let zero = DMatrix::from_element(2, 3, c(0.0, 0.0));
        let h = ChannelRealization::from_blocks(vec![zero.clone(), zero]).unwrap();
        assert_eq!(gaussian_input_mi(&h, 1e3).unwrap(), 0.0);
    }

    #[test]
    fn siso_unit_gain() {
        let h = ChannelRealization::scalar(c(1.0, 0.0));
        assert!((gaussian_input_mi(&h, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_two_by_two() {
        let h = ChannelRealization::from_blocks(vec![DMatrix::identity(2, 2)]).unwrap();
        assert!((gaussian_input_mi(&h, 2.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_snr_rejected() {
        let h = ChannelRealization::scalar(c(1.0, 0.0));
        assert!(gaussian_input_mi(&h, -1.0).is_err());
        let bpsk = Constellation::psk(1).unwrap();
        assert!(discrete_input_mi(&h, -1.0, &bpsk, &MiEstimatorSettings::default(), 0).is_err());
    }

    #[test]
    fn rectangular_channels_use_either_gram() {
        // det(I + s H H^H) = det(I + s H^H H): compare a 3x2 channel with its
        // conjugate transpose, rescaled so snr / n_t matches.
        let config = SystemConfig::new(2, 3, 1).unwrap();
        let h = sample_channel(&config, TrialStream::new(5, 1)).unwrap();
        let ht = ChannelRealization::from_blocks(vec![h.blocks()[0].adjoint()]).unwrap();
        let a = gaussian_input_mi(&h, 4.0).unwrap();
        let b = gaussian_input_mi(&ht, 6.0).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn alphabet_overflow_rejected() {
        let qam = Constellation::qam(6).unwrap();
        let config = SystemConfig::new(3, 1, 1).unwrap();
        let h = sample_channel(&config, TrialStream::new(1, 0)).unwrap();
        let err = discrete_input_mi(&h, 1.0, &qam, &MiEstimatorSettings::default(), 0);
        assert!(matches!(err, Err(Error::AlphabetTooLarge { .. })));
    }

    #[test]
    fn discrete_mi_is_exactly_zero_at_zero_snr() {
        let config = SystemConfig::new(2, 2, 2).unwrap();
        let h = sample_channel(&config, TrialStream::new(3, 4)).unwrap();
        let qpsk = Constellation::psk(2).unwrap();
        let settings = MiEstimatorSettings {
            noise_samples: 50,
            mi_seed: 1,
        };
        let est = discrete_input_mi(&h, 0.0, &qpsk, &settings, 0).unwrap();
        assert_eq!(est.bits, 0.0);
        assert_eq!(est.std_error, 0.0);
    }

    #[test]
    fn discrete_mi_saturates() {
        let h = ChannelRealization::scalar(c(1.0, 0.0));
        let bpsk = Constellation::psk(1).unwrap();
        let est = discrete_input_mi(&h, 1e6, &bpsk, &MiEstimatorSettings::default(), 0).unwrap();
        assert!((est.bits - 1.0).abs() < 0.01);
    }

    #[test]
    fn discrete_mi_deterministic_per_trial() {
        let config = SystemConfig::new(2, 1, 1).unwrap();
        let h = sample_channel(&config, TrialStream::new(8, 2)).unwrap();
        let bpsk = Constellation::psk(1).unwrap();
        let s = MiEstimatorSettings {
            noise_samples: 100,
            mi_seed: 42,
        };
        let a = discrete_input_mi(&h, 3.0, &bpsk, &s, 17).unwrap();
        let b = discrete_input_mi(&h, 3.0, &bpsk, &s, 17).unwrap();
        assert_eq!(a, b);
        let c = discrete_input_mi(&h, 3.0, &bpsk, &s, 18).unwrap();
        assert_ne!(a.unclamped_bits, c.unclamped_bits);
    }
}
