use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric: |M[{row},{col}] - M[{col},{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("Cholesky factorization failed at pivot {pivot} (value {value:e}); matrix is not positive definite")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("linear system is singular{}", .context.map(|c| format!(" ({c})")).unwrap_or_default())]
    Singular { context: Option<&'static str> },

    #[error("power iteration did not converge in {iterations} steps (last Rayleigh quotient {rayleigh:e})")]
    PowerIterationStalled { iterations: usize, rayleigh: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported norm order p = {0}: closed-form proximal maps exist only for p in {{1, 2, inf}}")]
    UnsupportedNorm(f64),

    #[error("index groups overlap or do not cover 0..{n}: index {index}")]
    InvalidGroups { n: usize, index: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite iterate at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("iteration diverged at iteration {iteration}: fixed-point residual {residual:e} exceeds 1e12")]
    Diverged { iteration: usize, residual: f64 },

    #[error("unsupported relaxation schedule family: {0}")]
    UnsupportedSchedule(&'static str),

    #[error("missing parameter `{name}` required by the {case} bound")]
    MissingParameter {
        case: &'static str,
        name: &'static str,
    },

    #[error("operator `{0}` is not single-valued")]
    NotSingleValued(String),

    #[error("trace does not carry iterate snapshots")]
    MissingSnapshots,

    #[error("need at least {needed} samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("sample {index} is not strictly positive ({value:e}); shrink the window")]
    NonPositiveSample { index: usize, value: f64 },

    #[error("point is not a zero of the operator: residual {residual:e} > {tol:e}")]
    NotAZero { residual: f64, tol: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("reference oracles disagree: distance {distance:e} > tol {tol:e} (first {first:?}, second {second:?})")]
    OracleDisagreement {
        distance: f64,
        tol: f64,
        first: Vec<f64>,
        second: Vec<f64>,
    },

    #[error("no reference oracle supports this problem: {0}")]
    NoOracle(String),
}
