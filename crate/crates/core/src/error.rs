use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix that must be positive definite has an eigenvalue at or below
    /// `rel_tol * max_eigenvalue`. For sample covariances this usually means
    /// too few samples for the data dimension.
    #[error(
        "singular matrix: min eigenvalue {min_eig:e} vs max {max_eig:e} (rel_tol {rel_tol:e})"
    )]
    SingularMatrix {
        min_eig: f64,
        max_eig: f64,
        rel_tol: f64,
    },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:e} vs max {max_eig:e}")]
    NotPsd { min_eig: f64, max_eig: f64 },

    #[error("degenerate spectrum: eigenvalues above one coincide at ranks {ranks:?}")]
    DegenerateSpectrum { ranks: Vec<usize> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures caused by the numerical content of the data rather
    /// than by malformed input or the filesystem.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularMatrix { .. } | Error::NotPsd { .. } | Error::DegenerateSpectrum { .. }
        )
    }
}
