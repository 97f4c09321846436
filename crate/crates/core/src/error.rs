use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index system mismatch: expected {expected}, found {found}")]
    IndexMismatch { expected: String, found: String },

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("invalid index system: {0}")]
    InvalidIndexSystem(String),

    #[error("matrix unit ({i}, {j}) out of range for label `{label}` of dimension {dim}")]
    OutOfRange {
        label: String,
        i: usize,
        j: usize,
        dim: usize,
    },

    #[error("malformed block {at}: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    MalformedBlock {
        at: String,
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("missing block for label `{0}`")]
    MissingBlock(String),

    #[error("neither map carries a verified *-homomorphism flag")]
    HomomorphismRequired,

    #[error("quantum semigroup has not been validated")]
    Unvalidated,

    #[error("mean is not {side}-invariant: residual {residual:e} exceeds {tol:e}")]
    NotInvariant {
        side: &'static str,
        residual: f64,
        tol: f64,
    },

    #[error("element is not additive: defect {defect:e} exceeds {tol:e}")]
    NotAdditive { defect: f64, tol: f64 },

    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),

    #[error("invalid irreducible representation data: {0}")]
    InvalidIrreps(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
