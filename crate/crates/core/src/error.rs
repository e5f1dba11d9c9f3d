use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not reach the requested accuracy (achieved error bound {achieved:e})")]
    Accuracy { achieved: f64 },

    #[error("matrix is not Hermitian (symmetry residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("means {0} and {1} are numerically coincident; merge them into one component with a larger multiplicity")]
    CoincidentMeans(f64, f64),

    #[error("degenerate exponential mixture: all weights are zero")]
    DegenerateMixture,

    #[error("exhaustive search space of {size} hypotheses exceeds the limit of {limit}")]
    SearchSpace { size: u128, limit: u128 },

    #[error("bit stream length {got} does not match the required {expected}")]
    BitLength { expected: usize, got: usize },

    #[error("solver stopped after {iterations} iterations with duality gap {gap:e} (best objective {objective})")]
    NonConvergence {
        iterations: usize,
        gap: f64,
        objective: f64,
    },
}
