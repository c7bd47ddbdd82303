use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// The plain beta likelihood was asked to evaluate an observation at 0 or 1.
    #[error("boundary observation ({0}): the beta density is 0 or infinite at y = 0 and y = 1")]
    Boundary(String),

    /// A likelihood or objective evaluation produced NaN or infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: String },

    #[error("design matrix is rank deficient; aliased columns: {}", columns.join(", "))]
    RankDeficient { columns: Vec<String> },

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    /// The optimizer ran out of iterations; `best` is the best point seen.
    #[error("optimizer did not converge after {iterations} iterations (best objective {best_value})")]
    NonConvergence {
        iterations: usize,
        best: Vec<f64>,
        best_value: f64,
    },

    #[error("Hessian at the optimum is singular or not positive definite (condition number {condition:e})")]
    SingularHessian { condition: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::NonConvergence { .. } | Error::SingularHessian { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
