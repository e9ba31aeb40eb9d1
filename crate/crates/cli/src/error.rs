use std::fmt;
use std::path::PathBuf;

use stochstab_core::langmuir::LangmuirError;
use stochstab_core::moments::MomentError;
use stochstab_core::sde::SdeError;
use stochstab_core::spectral::SpectralError;
use stochstab_core::ModelError;

use crate::spec::SpecError;

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Input = 2,
    Capacity = 3,
    Overflow = 4,
    Solver = 5,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Capacity(String),
    #[error("{message}")]
    Overflow { message: String },
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn kind(&self) -> ExitKind {
        match self {
            CliError::Spec(_) | CliError::Input(_) | CliError::Io { .. } => ExitKind::Input,
            CliError::Capacity(_) => ExitKind::Capacity,
            CliError::Overflow { .. } => ExitKind::Overflow,
            CliError::Solver(_) => ExitKind::Solver,
        }
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        CliError::Input(msg.to_string())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<MomentError> for CliError {
    fn from(e: MomentError) -> Self {
        match e {
            MomentError::BasisTooLarge { .. } => CliError::Capacity(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<LangmuirError> for CliError {
    fn from(e: LangmuirError) -> Self {
        match e {
            LangmuirError::InvalidParameter { .. } | LangmuirError::UnsupportedProfile(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<SdeError> for CliError {
    fn from(e: SdeError) -> Self {
        match e {
            SdeError::InvalidConfig(_) | SdeError::Model(_) => CliError::Input(e.to_string()),
            SdeError::Overflow { .. } => CliError::Overflow {
                message: e.to_string(),
            },
            _ => CliError::Solver(e.to_string()),
        }
    }
}
