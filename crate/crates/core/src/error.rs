use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid roll-off factor {0}: must lie in [0, 1]")]
    InvalidRollOff(f64),

    #[error("grid step {step} is coarser than the allowed maximum {max}")]
    GridTooCoarse { step: f64, max: f64 },

    #[error("pulse energy {energy} deviates from unity; normalize the coefficients first")]
    EnergyMismatch { energy: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no pulse width up to c = {max_c} meets the out-of-band target {eps}")]
    NotFound { eps: f64, max_c: f64 },

    #[error("pulse TBP {c} does not fit in the window TBP {omega}")]
    PulseExceedsWindow { omega: f64, c: f64 },

    #[error("channel matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("eigen-decomposition failed its consistency check: {0}")]
    EigenCheck(String),

    #[error("argument t = {t} outside the CGF domain t < {bound}")]
    DomainViolation { t: f64, bound: f64 },

    #[error("saddlepoint equation has no root for level {level}: {reason}")]
    NoRoot { level: f64, reason: &'static str },

    #[error("meta-converse threshold not found for Pe = {pe}")]
    ThresholdNotFound { pe: f64 },

    #[error("quadrature too coarse: kernel trace {trace} differs from {expected}")]
    InsufficientQuadrature { trace: f64, expected: f64 },

    #[error("no waterfilling multipliers satisfy both constraints (eps_W = {eps})")]
    NoFeasibleMultipliers { eps: f64 },

    #[error("pulse optimization found no feasible design: {0}")]
    Infeasible(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("equalizer memory {0} exceeds the supported maximum of 8")]
    MemoryTooLarge(usize),

    #[error("band-limited pulse needs an explicit blocklength (use the OOI constructor)")]
    NeedsBlocklength,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
