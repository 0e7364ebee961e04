use thiserror::Error;

/// Errors raised by the numerical kernels and the run pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid of {points} points exceeds the memory budget of {budget} points")]
    MemoryBudget { points: usize, budget: usize },

    #[error("axis index {axis} out of range for complex dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("field expected to be real has imaginary part {imag:.3e} at point {point}")]
    NotReal { point: usize, imag: f64 },

    #[error("form degree {degree} not allowed here ({reason})")]
    Degree { degree: usize, reason: &'static str },

    #[error("metric is not Hermitian (defect {defect:.3e} at point {point})")]
    NotHermitian { point: usize, defect: f64 },

    #[error("metric not positive-definite: smallest eigenvalue {eigenvalue:.6e} at point {point} {coords:?}")]
    PositivityViolation {
        point: usize,
        coords: Vec<f64>,
        eigenvalue: f64,
    },

    #[error("wedge map with omega^(n-1) is singular at point {point} (condition {condition:.3e})")]
    SingularWedgeMap { point: usize, condition: f64 },

    #[error("operation requires complex dimension n >= 2 (got {0})")]
    DimensionTooLow(usize),

    #[error("{solver} did not converge: residual {residual:.3e} after {iterations} iterations (target {target:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("kernel element changes sign: min {min:.3e}, max {max:.3e}")]
    SignIndefinite { min: f64, max: f64 },

    #[error("metric is not Gauduchon (residual {residual:.3e} > {tol:.1e})")]
    NotGauduchon { residual: f64, tol: f64 },

    #[error("right-hand side violates the solvability condition: normalized integral {integral:.3e} > {tol:.1e}")]
    IncompatibleRhs { integral: f64, tol: f64 },

    #[error("pointwise eigenproblem failed at point {point}: {reason}")]
    EigenFailure { point: usize, reason: String },

    #[error("certificate failed: greatest eigenvalue {eigenvalue:.3e} >= -{margin:.1e} at point {point}")]
    CertificateFailed {
        point: usize,
        eigenvalue: f64,
        margin: f64,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
