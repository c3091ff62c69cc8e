use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("binomial C({a},{b}) overflows 64-bit exact arithmetic")]
    Overflow { a: u64, b: u64 },

    #[error("argument {a} exceeds binomial table size {max_n}")]
    OutOfTable { a: usize, max_n: usize },

    #[error("invalid k-set: {0}")]
    InvalidKSet(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("enumeration of {count} cliques exceeds the cap of {cap}; use column generation instead")]
    EnumerationCap { count: u128, cap: u64 },

    #[error("gram matrix of the support is singular (reciprocal condition {rcond:e})")]
    SingularGram { rcond: f64 },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program has {vars} variables, above the dense cap of {cap}")]
    LpTooLarge { vars: usize, cap: usize },

    #[error("inequality system has an empty interior; relax the constraints (e.g. increase delta)")]
    EmptyInterior,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
