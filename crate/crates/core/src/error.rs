use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid size {m}x{n}: both dimensions must be even and at least {min}")]
    InvalidGrid { m: usize, n: usize, min: usize },

    #[error("invalid matrix size {m}: {reason}")]
    InvalidSize { m: usize, reason: &'static str },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },

    #[error("unsupported differentiation order {0}")]
    UnsupportedOrder(usize),

    #[error("LU factorization broke down at block {block}, row {row} (pivot {pivot:e})")]
    FactorizationBreakdown {
        block: usize,
        row: usize,
        pivot: f64,
    },

    #[error("LU factorization of block {block} has multiplier growth {growth:e}")]
    PivotGrowth { block: usize, growth: f64 },

    #[error("factorization does not match the operator: {0}")]
    FactorMismatch(&'static str),

    #[error("rational approximation construction failed: {0}")]
    CfConstruction(String),

    #[error("unsupported CF degree {0} (expected 10, 12 or 14)")]
    UnsupportedCfDegree(usize),

    #[error("block {block} is nearly defective: cond(V) = {cond:e}")]
    NearlyDefective { block: usize, cond: f64 },

    #[error("eigen decomposition failed for block {0}")]
    EigenFailure(usize),

    #[error("spectral diagnostics limited to m <= {limit} (got {m})")]
    DiagnosticsTooLarge { m: usize, limit: usize },

    #[error("scheme {scheme} cannot integrate dispersive problems")]
    DispersiveIncompatible { scheme: &'static str },

    #[error("IMEX-BDF4 needs three previous steps, history holds {0}")]
    MissingHistory(usize),

    #[error("time span {span} is not an integer multiple of h = {h}")]
    NonIntegralSteps { span: f64, h: f64 },

    #[error("invalid time-stepping parameters: {0}")]
    InvalidSchedule(&'static str),

    #[error("spherical harmonic degree {l}, order {order} not resolvable on m = {m}")]
    UnresolvableHarmonic { l: usize, order: i64, m: usize },

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("unknown scheme '{0}'")]
    UnknownScheme(String),

    #[error("reference solution has zero norm")]
    ZeroReference,

    #[error("non-finite value in solution at t = {t}")]
    NonFinite { t: f64 },
}
