use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("timestep {dt:e} s violates the CFL bound dx/c0 = {limit:e} s")]
    CflViolation { dt: f64, limit: f64 },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("array length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite field value at step {step}")]
    NonFiniteField { step: u64 },

    #[error("polarization current has imaginary residue {residue:e} (relative)")]
    ImaginaryCurrent { residue: f64 },

    #[error("series `{0}` is not recorded for this scenario")]
    MissingSeries(String),

    #[error("series has {available} samples, analysis needs at least {needed}")]
    SeriesTooShort { needed: usize, available: usize },

    #[error("steady state not reached")]
    SteadyStateNotReached,

    #[error("permittivity is undefined at zero frequency")]
    ZeroFrequency,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
