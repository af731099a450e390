//! Distortion-outage analysis for analogue Gaussian sources sent over
//! MIMO block-fading channels with receiver-only channel knowledge.
//!
//! The crate covers two schemes:
//!
//! * the transmitter-informed lower bound, whose outage event is
//!   `I_H(snr) <= R_s(D̄) / b` with ties counted as outage,
//! * tandem source-channel separation at coding rate `R_c`, whose outage
//!   event reduces to `I_H(snr) <= R_c` inside the admissible rate range.
//!
//! Monte Carlo estimators share one counter-based channel stream so the
//! two schemes can be compared trial by trial, and the closed-form SNR
//! exponents live in [`exponents`].

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod exponents;
pub mod model;
pub mod mutual_info;
pub mod outage;
pub mod sweep;

pub use channel::{sample_channel, ChannelRealization, TrialStream};
pub use error::{Error, Result};
pub use model::{
    admissible_rate_range, db_to_linear, gaussian_rd_distortion, gaussian_rd_rate,
    optimal_separation_rate, ChannelInput, Constellation, DistortionSpec, RateRange, Scenario,
    SourceModel, SystemConfig,
};
pub use mutual_info::{MiEstimate, MiEstimatorSettings};
pub use outage::{binomial_ci, OutageEstimate, SeparationRegime};
pub use sweep::{attach_slopes, run_sweep, SweepResult, SweepRow};
