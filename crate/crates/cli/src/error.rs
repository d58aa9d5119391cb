use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success = 0,
    Validation = 1,
    Threshold = 2,
    Io = 3,
    /// Fundamental-relation check on a stack with no absorbing region.
    BoundaryFlux = 4,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("config: {0}")]
    Config(String),
    #[error("material '{0}' not found next to the config or on KKQED_MATERIAL_PATH")]
    MaterialNotFound(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] kkqed::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        use kkqed::decay::DecayError;
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Config(_) | CliError::MaterialNotFound(_) => Status::Io,
            CliError::Model(kkqed::Error::Decay(DecayError::NoConvergence { .. })) => Status::Threshold,
            CliError::Invalid(_) | CliError::Model(_) | CliError::Threads(_) => Status::Validation,
        }
    }

    fn kind(&self) -> &'static str {
        use kkqed::decay::DecayError;
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::MaterialNotFound(_) => "material_not_found",
            CliError::Invalid(_) => "invalid_input",
            CliError::Model(kkqed::Error::Decay(DecayError::SurfaceModePole)) => "surface_mode_divergence",
            CliError::Model(kkqed::Error::Decay(DecayError::NoConvergence { .. })) => "no_convergence",
            CliError::Model(kkqed::Error::Fock(kkqed::fockspace::FockError::CutoffTooSmall { .. })) => "cutoff_too_small",
            CliError::Model(_) => "model",
            CliError::Threads(_) => "threads",
        }
    }

    /// One-line JSON rendering for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        let r = Report { error: self.kind(), message: self.to_string(), exit_code: self.status() as i32 };
        serde_json::to_string(&r).expect("error report serializes")
    }
}

macro_rules! from_model_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Model(e.into())
            }
        })*
    };
}

from_model_error!(
    kkqed::permittivity::PermittivityError,
    kkqed::layered1d::LayeredError,
    kkqed::fourport::DeviceError,
    kkqed::fockspace::FockError,
    kkqed::decay::DecayError
);

pub type Result<T> = std::result::Result<T, CliError>;
