use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("coefficient matrix is not elliptic: smallest eigenvalue {min_eigenvalue:e}")]
    NotElliptic { min_eigenvalue: f64 },
    #[error("coefficient matrix must be square with finite entries")]
    MalformedMatrix,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("spatial dimension must be 1, 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("points per axis must be even and at least 4, got {0}")]
    OddN(usize),
    #[error("box half-width must be positive and finite, got {0}")]
    NonpositiveR(f64),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("plane-wave mode {0} is not an integer lattice index")]
    ModeNotOnLattice(f64),
    #[error("field file: {0}")]
    FileFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("bad exponent: {0}")]
    BadExponent(String),
    #[error("regularity must lie in [0, 2], got {0}")]
    NegativeS(f64),
    #[error("admissible pair set is empty")]
    EmptyPairSet,
    #[error("pair (q={q}, r={r}) is not admissible in dimension {n}")]
    InadmissiblePair { n: usize, q: f64, r: f64 },
    #[error("nonlinearity power must be positive, got {0}")]
    BadPower(f64),

    #[error("fields or trajectories live on different grids or time axes")]
    GridMismatch,
    #[error("invalid multipoint condition: {0}")]
    InvalidMultipoint(String),
    #[error("multipoint condition is resonant: min |D(xi)| = {min_abs:e} <= eps_res = {eps_res:e}")]
    Resonance { min_abs: f64, eps_res: f64 },
    #[error("multipoint time {lambda} does not lie on the time grid")]
    LambdaOffGrid { lambda: f64 },
    #[error("times must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("non-finite values encountered: {0}")]
    NonFinite(String),
    #[error("fixed-point iteration did not converge in {iterations} iterations (last distance {last_distance:e})")]
    NoConvergence { iterations: usize, last_distance: f64 },
}
