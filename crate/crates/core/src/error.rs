use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("joint input alphabet too large: {size} vectors (limit {limit})")]
    AlphabetTooLarge { size: u128, limit: u128 },

    #[error("regression needs at least two distinct SNR values, got {0} usable point(s)")]
    DegenerateRegression(usize),

    #[error(
        "slope window [{low_db} dB, {high_db} dB] contains fewer than two rows with nonzero outage"
    )]
    InsufficientRows { low_db: f64, high_db: f64 },

    #[error("at {snr_db} dB: {source}")]
    AtSnr {
        snr_db: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(name: &'static str, reason: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter {
        name,
        reason: reason.into(),
    })
}
