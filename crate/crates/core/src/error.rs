use num_complex::Complex64;
use thiserror::Error;

/// Outcome of a failed pointwise evaluation.
///
/// Poles are ordinary outcomes for the transforms in this crate (zeros of a
/// characteristic function are eigenvalues of the main operator), so they are
/// reported as a tagged variant instead of a panic or a NaN.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("pole at z = {z}")]
    Pole { z: Complex64 },
    #[error("evaluation point {z} lies on the real axis")]
    RealAxis { z: Complex64 },
    #[error("quadrature did not converge: error estimate {estimate:e} after {subdivisions} subdivisions")]
    Quadrature { estimate: f64, subdivisions: usize },
}

impl EvalError {
    pub fn is_pole(&self) -> bool {
        matches!(self, EvalError::Pole { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("von Neumann parameter must lie in [0, 1), got {0}")]
    InvalidKappa(f64),
    #[error("factor {0} is not unimodular")]
    NotUnimodular(Complex64),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("normalization {measured} does not match the required value {required}")]
    Normalization { measured: f64, required: f64 },
    #[error("{nodes} nodes cannot hold {atoms} atoms")]
    TooFewNodes { nodes: usize, atoms: usize },
    #[error("rho = {rho} is not admissible; allowed: (-inf, -1) or [{lower}, +inf)")]
    InadmissibleRho { rho: f64, lower: f64 },
    #[error("expected a function with role {expected}, got {found}")]
    WrongRole {
        expected: &'static str,
        found: &'static str,
    },
    #[error("function is not in the Donoghue class: Q = {q}, L = {l}")]
    NotDonoghue { q: f64, l: f64 },
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
    #[error("no grid point could be compared (all {0} points are poles)")]
    NoComparablePoints(usize),
    #[error("input is not Herglotz: Im f = {im} at z = {z}")]
    NotHerglotz { z: Complex64, im: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
