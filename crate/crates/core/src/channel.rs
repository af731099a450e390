//! Seeded i.i.d. Rayleigh block-fading realizations.
//!
//! Every trial owns an independent ChaCha8 stream: the key is expanded from
//! the 64-bit seed and the ChaCha stream id is the trial index. A trial's
//! realization therefore depends only on `(seed, trial_index, config)`,
//! whatever thread evaluates it.
//!
//! Entries are drawn as `(x + i y) / sqrt(2)` with `x, y` independent
//! standard normals from `rand_distr::StandardNormal` (ziggurat), real part
//! first, matrices in block order and column-major within a block.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::model::SystemConfig;

/// Identifies the random stream of one Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialStream {
    pub seed: u64,
    pub trial_index: u64,
}

impl TrialStream {
    pub fn new(seed: u64, trial_index: u64) -> Self {
        Self { seed, trial_index }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.trial_index);
        rng
    }
}

/// Circularly-symmetric complex normal with unit variance.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// The `N` fading matrices `H_1..H_N`, each `n_r x n_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    blocks: Vec<DMatrix<Complex64>>,
}

impl ChannelRealization {
    /// Builds a realization from explicit matrices, all of the same shape.
    pub fn from_blocks(blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return invalid("channel", "at least one fading block is required");
        };
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return invalid("channel", "fading matrices must be non-empty");
        }
        if blocks.iter().any(|b| b.shape() != shape) {
            return invalid("channel", "all fading blocks must share one shape");
        }
        if blocks
            .iter()
            .flat_map(|b| b.iter())
            .any(|h| !h.re.is_finite() || !h.im.is_finite())
        {
            return invalid("channel", "entries must be finite");
        }
        Ok(Self { blocks })
    }

    /// Single-antenna, single-block channel with gain `h`.
    pub fn scalar(h: Complex64) -> Self {
        Self {
            blocks: vec![DMatrix::from_element(1, 1, h)],
        }
    }

    pub fn blocks(&self) -> &[DMatrix<Complex64>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_r(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn n_t(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub fn config(&self) -> SystemConfig {
        SystemConfig {
            n_t: self.n_t(),
            n_r: self.n_r(),
            blocks: self.block_count(),
        }
    }
}

pub fn sample_channel(config: &SystemConfig, stream: TrialStream) -> Result<ChannelRealization> {
    config.validate()?;
    let mut rng = stream.rng();
    let blocks = (0..config.blocks)
        .map(|_| DMatrix::from_fn(config.n_r, config.n_t, |_, _| complex_normal(&mut rng)))
        .collect();
    Ok(ChannelRealization { blocks })
}
