use thiserror::Error;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("incompatible coefficients: {0}")]
    Incompatible(String),
    #[error("jet has zero constant term")]
    ZeroConstantTerm,
    #[error("logarithm of a jet with nonpositive constant term {0}")]
    NonPositiveLog(f64),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("shift is empty after pruning dead symbols")]
    EmptyShift,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("theta must lie in (0,1), got {0}")]
    InvalidTheta(f64),
    #[error("depth mismatch: expected {expected}, got {found}")]
    DepthMismatch { expected: usize, found: usize },
    #[error("shift is reducible")]
    Reducible,
    #[error("shift is not primitive")]
    NotPrimitive,
    #[error("eigensolver failed: {0}")]
    EigenFailure(String),
    #[error("Perron root {lambda} is not simple (nearest other eigenvalue at distance {distance})")]
    NotSimple { lambda: f64, distance: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("R - lambda I is near-singular (condition number {0:e})")]
    NearSingular(f64),
    #[error("epsilon must be nonzero")]
    ZeroEpsilon,
    #[error("remainder identity violated for {quantity} at order {order}, epsilon {epsilon:e}: direct {direct:e}, formula {formula:e}")]
    IdentityViolation { quantity: String, order: usize, epsilon: f64, direct: f64, formula: f64 },
    #[error("cross-check failed for {what}: discrepancy {discrepancy:e}")]
    CrossCheck { what: String, discrepancy: f64 },
    #[error("grid count >= 4 required, got {0}")]
    GridTooSmall(usize),
    #[error("theta schedule required")]
    MissingSchedule,
    #[error("no sign change of pressure on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("system is not contractive: {0}")]
    NonContractive(String),
    #[error("degenerate: single-edge system has dimension 0")]
    DegenerateSystem,
    #[error("word is not admissible: {0:?}")]
    Inadmissible(Vec<usize>),
    #[error("anchor {anchor} lies outside the seed interval [{lo}, {hi}]")]
    AnchorOutside { anchor: f64, lo: f64, hi: f64 },
    #[error("map derivative vanishes or changes sign on edge {0}")]
    VanishingDerivative(usize),
    #[error("exponent table required for truncation studies")]
    MissingExponents,
    #[error("degenerate thermodynamics: pressure derivative {0} is not negative")]
    DegeneratePressure(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
