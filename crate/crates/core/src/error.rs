use thiserror::Error;

/// Errors produced while building, fitting, or conformalizing a surrogate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("underdetermined: {samples} samples for {basis} basis terms")]
    Underdetermined { samples: usize, basis: usize },

    #[error("rank deficient: condition number {condition:e} exceeds {limit:e}")]
    RankDeficient { condition: f64, limit: f64 },

    #[error("leverage: sample {index} has 1 - h = {gap:e}, below {limit:e}")]
    Leverage { index: usize, gap: f64, limit: f64 },

    #[error("zero variance: output variance estimate {variance:e} is too small to normalize")]
    ZeroVariance { variance: f64 },

    #[error("domain: value {value} in dimension {dim} lies outside [{lower}, {upper}]")]
    Domain {
        dim: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("overflow: basis size for N={input_dim}, P={max_degree} does not fit in memory")]
    Overflow { input_dim: usize, max_degree: usize },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical fit itself, as opposed to bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Underdetermined { .. }
                | Error::RankDeficient { .. }
                | Error::Leverage { .. }
                | Error::ZeroVariance { .. }
        )
    }

    /// Short machine-readable tag, e.g. `underdetermined`.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Underdetermined { .. } => "underdetermined",
            Error::RankDeficient { .. } => "rank_deficient",
            Error::Leverage { .. } => "leverage",
            Error::ZeroVariance { .. } => "zero_variance",
            Error::Domain { .. } => "domain",
            Error::Dimension { .. } => "dimension",
            Error::Overflow { .. } => "overflow",
            Error::Invalid(_) => "invalid",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
