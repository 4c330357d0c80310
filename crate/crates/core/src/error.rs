use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite angle: {0}")]
    NonFinite(f64),

    #[error("invalid arc: {0}")]
    InvalidArc(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    /// An observation that leaves the belief with zero mass. Under the
    /// zero-misdetection model this can only be a caller bug.
    #[error("inconsistent observation: posterior support is empty")]
    InconsistentObservation,

    #[error("posterior support is not contiguous ({pieces} pieces)")]
    NonContiguous { pieces: usize },

    #[error("sensing phase is over (slot {slot}, budget {budget})")]
    SensingExhausted { slot: usize, budget: usize },

    #[error("no data slots left (L = N = {0})")]
    NoDataSlots(usize),

    #[error("angle {theta} lies outside the prior support")]
    OutsidePrior { theta: f64 },

    /// A beam narrower than an f64 angle can represent near ±π.
    #[error("beam width {width:e} rad is below the resolvable minimum {min:e} rad")]
    BelowResolution { width: f64, min: f64 },

    #[error("density has zero mass on the requested support")]
    ZeroMass,
}
