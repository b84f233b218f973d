use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension {found} is invalid: {expected}")]
    Dimension { found: usize, expected: &'static str },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("reflection vanishes at d = 0, detuning = 0; the LO phase reference is undefined")]
    SingularReflection,

    #[error("missing cross moments for beam pair ({0}, {1})")]
    MissingPair(usize, usize),

    #[error("state is unphysical: minimum symplectic eigenvalue {min_symplectic_eigenvalue:.6} < 1")]
    Unphysical { min_symplectic_eigenvalue: f64 },

    #[error("{0}")]
    Incompatible(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("design matrix is identically zero")]
    ZeroDesign,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("{path}:{line}: {message}")]
    Schema {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or inconsistent input data, as
    /// opposed to numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_) | Error::SingularReflection)
    }
}
