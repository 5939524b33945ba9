//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AnfisError>;

#[derive(Debug, Error)]
pub enum AnfisError {
    /// A membership-function parameter vector violates its family's domain.
    #[error("invalid {family} parameters: {detail}")]
    InvalidMfParams { family: String, detail: String },

    /// A configuration value is out of its admissible range.
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector/matrix dimensions do not line up.
    #[error("shape error in {what}: expected {expected}, got {got}")]
    Shape {
        what: String,
        expected: usize,
        got: usize,
    },

    /// The grid partition would produce more rules than allowed.
    #[error("rule explosion: grid partition yields {rules} rules, limit is {max}")]
    RuleExplosion { rules: usize, max: usize },

    /// Non-finite or otherwise unusable numeric data.
    #[error("data error: {0}")]
    Data(String),

    /// CSV parse failure with the offending location when known.
    #[error("parse error in {path}{}: {detail}", location(.row, .col))]
    Parse {
        path: String,
        row: Option<usize>,
        col: Option<usize>,
        detail: String,
    },

    /// Model file is structurally invalid.
    #[error("model format error: {0}")]
    ModelFormat(String),

    /// Model file declares an unsupported format version.
    #[error("model format version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    /// Column selection failed (unknown or duplicated names).
    #[error("selection error: {0}")]
    Selection(String),

    #[error("summary error: {0}")]
    Summary(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(row: &Option<usize>, col: &Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" at column {c}"),
        (None, None) => String::new(),
    }
}
