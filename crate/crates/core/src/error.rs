use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular triangular system: leading element {value:e}")]
    Singular { value: f64 },

    #[error(
        "root finder did not converge after {iterations} iterations (coefficients {coeffs:?})"
    )]
    NonConvergence { coeffs: Vec<f64>, iterations: usize },

    #[error(
        "degenerate Hankel pencil: pivot ratio {pivot_ratio:e} below {threshold:e} \
         (switch points coincide or the data has fewer intervals than K/2)"
    )]
    Degenerate { pivot_ratio: f64, threshold: f64 },

    #[error("infeasible moments: generalized eigenvalues with imaginary part above {imag_tol:e}: {roots:?}")]
    Infeasible {
        roots: Vec<Complex64>,
        imag_tol: f64,
    },

    #[error("inconsistent recovery: {0}")]
    Inconsistent(String),

    #[error("moment data is badly scaled ({0}); rescale the problem to the unit interval")]
    Scaling(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
