use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for level {k} (basis size {size})")]
    IndexOutOfRange { index: usize, k: u32, size: usize },

    #[error("non-finite integrand sample at z = {z}")]
    NonFiniteSample { z: String },

    #[error("symbol `{symbol}` is not real on the quadrature grid (imag part {imag:e})")]
    NonRealSymbol { symbol: String, imag: f64 },

    #[error("{method} is unavailable for the {model} model")]
    MethodUnavailable { method: &'static str, model: &'static str },

    #[error("section normalization drift at k = {k}, j = {j}: quadrature norm {norm} (|dev| = {dev:e})")]
    NormalizationDrift { k: u32, j: usize, norm: f64, dev: f64 },

    #[error("closed-form kernel fixture failed at k = {k}: relative deviation {dev:e}")]
    ClosedFormGate { k: u32, dev: f64 },

    #[error("operation requires a spectrum of order {expected}, got {got}")]
    WrongOrder { expected: &'static str, got: &'static str },

    #[error("eigen-data missing; call eigendecompose first")]
    NotDecomposed,

    #[error("eigensolver residual {residual:e} exceeds {limit:e}")]
    EigenResidual { residual: f64, limit: f64 },

    #[error("invalid band: {0}")]
    InvalidBand(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("empty threshold grid")]
    EmptyGrid,

    #[error("b-quadrature under-resolved: refinement changed the result by {diff:e} (tol {tol:e})")]
    UnderResolved { diff: f64, tol: f64 },

    #[error("decay fit needs at least {needed} positive samples, got {got}")]
    FitTooShort { needed: usize, got: usize },

    #[error("bad config: {0}")]
    Config(String),

    #[error("self-test failed: {0}")]
    SelfTest(String),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
