use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("run diverged at step {step}: iterate norm {norm:e}")]
    Diverged { step: usize, norm: f64 },

    #[error("iteration count is undefined for a run that hit the iteration cap; use the primal-integral measure instead")]
    IterationCountUndefined,

    #[error("characteristic equation has complex roots (discriminant {0:e} < 0)")]
    ComplexRoots(f64),

    #[error("characteristic equation has a repeated root {0}")]
    RepeatedRoot(f64),

    #[error("outside certificate scope: {0}")]
    OutsideCertificateScope(String),

    #[error("every configuration diverged on the sample")]
    AllDiverged,

    #[error("empty {0}")]
    Empty(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
