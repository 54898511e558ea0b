use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a precondition; `name` is the offending key.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    /// The inverse transform produced an imaginary residue above tolerance,
    /// i.e. the spectrum is not conjugate symmetric.
    #[error("spectrum is not conjugate symmetric (imaginary residue {residue:e})")]
    SymmetryViolation { residue: f64 },

    #[error("mean mode {magnitude:e} exceeds tolerance {tolerance:e}; operator (-d^2/dx^2)^(-1/2) is undefined")]
    MeanMode { magnitude: f64, tolerance: f64 },

    #[error("fixed-point denominator vanishes for some real wavenumber (c = {speed})")]
    DenominatorVanishes { speed: f64 },

    #[error("iteration diverged at step {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    /// Experiment outcomes contradict an expected ordering.
    #[error("inconsistent results: {0}")]
    Inconsistent(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document {path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerics rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::SymmetryViolation { .. }
                | Error::Divergence { .. }
                | Error::Inconsistent(_)
        )
    }
}
