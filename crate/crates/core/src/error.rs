use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },

    /// `dim` saturates at `usize::MAX` when the product overflows.
    #[error("Hilbert space dimension {} exceeds the cap {cap}", describe_dim(*.dim))]
    SizeExceeded { dim: usize, cap: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("time step failed at t = {time}: {message}")]
    Propagation { time: f64, message: String },

    #[error("exponent fit failed: {0}")]
    Fit(String),

    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("cache format: {0}")]
    Format(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            field,
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::SizeExceeded { .. })
    }
}

fn describe_dim(dim: usize) -> String {
    if dim == usize::MAX {
        "overflowing usize".to_owned()
    } else {
        dim.to_string()
    }
}

pub type Result<T> = std::result::Result<T, Error>;
