use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its admissible domain.
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("dimension {0} is not supported (expected 1..=4)")]
    Dimension(usize),
    /// The grid cannot resolve the band of the block without aliasing.
    #[error("grid of {samples} samples per axis cannot resolve band limit {band} (need > {required})")]
    Nyquist {
        samples: usize,
        band: f64,
        required: f64,
    },
    #[error("quadrature for level {level} did not converge: relative change {change:e} > {tol:e} after {refinements} refinements")]
    Quadrature {
        level: u32,
        change: f64,
        tol: f64,
        refinements: u32,
    },
    /// Requested storage exceeds the configured coefficient budget.
    #[error("field needs {needed} coefficients, budget is {budget}")]
    Budget { needed: usize, budget: usize },
    #[error("sequence is not square-summable: {0}")]
    Divergent(&'static str),
    #[error("frequency index outside the stored ball")]
    OutOfBall,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
