use thiserror::Error;

/// Errors raised by state construction and the analytic engine.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {deviation:.3e} (tol {tol:.1e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not unitary: max |(U\u{2020}U - I)_ij| = {0:.3e}")]
    NotUnitary(f64),

    #[error("operator is not positive semidefinite: min eigenvalue {0:.3e}")]
    NotPositive(f64),

    #[error("trace is {0}, expected 1 within tolerance")]
    BadTrace(f64),

    #[error("projection probability {0:.3e} is degenerate; conditional state undefined")]
    DegenerateProjection(f64),

    #[error("detector overlap modulus {v0} too close to 1; orthogonal complement undefined")]
    DegenerateComplement { v0: f64 },

    #[error("one-sided path population: probability {0:.3e} leaves a conditional state undefined")]
    DegeneratePath(f64),

    #[error("state leaks outside the embedded two-level detector span: leakage {0:.3e}")]
    EmbeddingLeakage(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fringe fit failed: {0}")]
    Fit(String),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    #[error("eigenvalue iteration did not converge")]
    EigenNonConvergence,
}

pub type Result<T> = std::result::Result<T, CoreError>;
