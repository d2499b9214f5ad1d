use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precision overflow: an entry exceeded 2^{limit_bits} in magnitude")]
    PrecisionOverflow { limit_bits: u32 },

    #[error("matrix is not unimodular: |det - 1| = {deviation:e}")]
    NotUnimodular { deviation: f64 },

    #[error("element is not hyperbolic: |trace| = {trace}")]
    NotHyperbolic { trace: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("enumeration not stabilized: {0}")]
    NonStabilized(String),

    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: String },

    #[error("{what} did not converge: {detail}")]
    NonConvergence { what: &'static str, detail: String },

    #[error("branch gap: {0}")]
    BranchGap(String),

    #[error("route disagreement: {0}")]
    RouteDisagreement(String),

    #[error("resonance budget exceeded: {boxes:e} boxes > budget {budget:e}")]
    BudgetExceeded { boxes: f64, budget: f64 },

    #[error("brute-force scan exhausted: {0}")]
    Exhausted(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("schema error in {origin}: {detail}")]
    Schema { origin: String, detail: String },

    #[error("file not found: {0}")]
    FileNotFound(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::PrecisionOverflow { .. } => "PRECISION_OVERFLOW",
            Error::NotUnimodular { .. } => "NOT_UNIMODULAR",
            Error::NotHyperbolic { .. } => "NOT_HYPERBOLIC",
            Error::Degenerate(_) => "DEGENERATE",
            Error::NonStabilized(_) => "NON_STABILIZED",
            Error::Pole { .. } => "POLE",
            Error::NonConvergence { .. } => "NON_CONVERGENCE",
            Error::BranchGap(_) => "BRANCH_GAP",
            Error::RouteDisagreement(_) => "ROUTE_DISAGREEMENT",
            Error::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
            Error::Exhausted(_) => "EXHAUSTED",
            Error::InvalidInput(_) => "INVALID_INPUT",
            Error::Schema { .. } => "SCHEMA_ERROR",
            Error::FileNotFound(_) => "FILE_NOT_FOUND",
            Error::Io(_) => "IO_ERROR",
        }
    }

    /// Process exit status: 1 usage, 2 I/O, 3 numerical failure, 4 non-stabilized enumeration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) => 1,
            Error::FileNotFound(_) | Error::Io(_) | Error::Schema { .. } => 2,
            Error::NonStabilized(_) => 4,
            _ => 3,
        }
    }
}
