use thiserror::Error;

/// Errors produced by grid construction, operator application, and studies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size: {0}")]
    GridSize(String),

    #[error("stencil leaves the extended grid at index {index:?} (axis {axis})")]
    OutOfDomain { index: Vec<i64>, axis: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("boundary values must be zero before ghost filling (|{value:.3e}| at {index:?})")]
    NonzeroBoundary { index: Vec<i64>, value: f64 },

    #[error("quadrature produced a non-finite value at {x:?}")]
    QuadratureFailure { x: Vec<f64> },

    #[error("source support precondition violated: {0}")]
    SupportPrecondition(String),

    #[error(
        "conjugate gradient did not reach tol {tol:.3e} within {maxit} iterations \
         (final relative residual {residual:.3e}, {verdict})"
    )]
    CgFailure {
        tol: f64,
        maxit: usize,
        residual: f64,
        verdict: &'static str,
        history: Vec<f64>,
    },

    #[error("boundary reproduction defect in lifted field: {0}")]
    ConstructionDefect(String),

    #[error("unknown manufactured case `{0}`")]
    UnknownCase(String),

    #[error("report validation: {0}")]
    ReportValidation(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
