use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug, Clone)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A quadrature or iterative scheme did not converge to the requested
    /// tolerance. Carries the best estimate obtained and its error estimate.
    #[error("accuracy error in {op}: estimate {best} +- {err} did not reach tol {tol}")]
    Accuracy {
        op: &'static str,
        best: f64,
        err: f64,
        tol: f64,
    },

    /// A moment sequence or matrix reduction was numerically singular.
    #[error("degeneracy in {op}: {detail}")]
    Degenerate { op: &'static str, detail: String },

    /// A configured resource budget (subdivisions, cells, truncation, wall
    /// clock) was exceeded.
    #[error("budget exceeded in {op}: {detail}")]
    Budget { op: &'static str, detail: String },

    /// Caller violated an API contract (dimension mismatch, empty input).
    #[error("contract violation in {op}: {detail}")]
    Contract { op: &'static str, detail: String },

    /// Unknown identifier in a catalog lookup.
    #[error("unknown id {id:?}; known ids: {known}")]
    Catalog { id: String, known: String },

    /// I/O failure with path context.
    #[error("io error on {path}: {detail}")]
    Io { path: String, detail: String },

    /// Malformed input file or record.
    #[error("parse error in {what}: {detail}")]
    Parse { what: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn contract(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Contract {
            op,
            detail: detail.into(),
        }
    }
}
