use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("not a physical state: smallest symplectic eigenvalue {min_nu} < 1")]
    InvalidState { min_nu: f64 },

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("unstable Hamiltonian: {0}")]
    Unstable(String),

    #[error("unsupported Hamiltonian: {0}")]
    Unsupported(String),

    #[error("invalid switching profile: ramp {ramp}, duration {duration} (need 0 < ramp < duration/2)")]
    InvalidProfile { ramp: f64, duration: f64 },

    #[error("invalid model parameter: {0}")]
    InvalidSpec(String),

    #[error("invalid integration grid: {0}")]
    InvalidGrid(String),

    #[error("symplectic defect {defect:e} at t = {t} exceeds {limit:e}; reduce the step size")]
    StepSize { t: f64, defect: f64, limit: f64 },

    #[error("non-finite propagator entries at t = {t}")]
    Overflow { t: f64 },

    #[error("numerical quality: {0}")]
    NumericalQuality(String),

    #[error("Fock oracle invalid: {0}")]
    OracleInvalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, with pipeline stage wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the failure is a numerical-quality problem rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self.root(),
            Error::StepSize { .. }
                | Error::Overflow { .. }
                | Error::NumericalQuality(_)
                | Error::OracleInvalid(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self.root(), Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
