use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Problems with the shape or content of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemaError {
    MissingColumn(String),
    DuplicateColumn(String),
    EmptyInput,
    LengthMismatch {
        column: String,
        expected: usize,
        found: usize,
    },
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    NonFinite {
        row: usize,
        column: String,
    },
    BinaryViolation {
        row: usize,
        column: String,
        value: f64,
    },
    WrongKind {
        column: String,
        expected: &'static str,
    },
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaError::MissingColumn(c) => write!(f, "missing column `{c}`"),
            SchemaError::DuplicateColumn(c) => write!(f, "duplicate column `{c}`"),
            SchemaError::EmptyInput => f.write_str("empty input"),
            SchemaError::LengthMismatch {
                column,
                expected,
                found,
            } => write!(f, "column `{column}` has {found} rows, expected {expected}"),
            SchemaError::NonNumeric { row, column, value } => {
                write!(f, "non-numeric value {value:?} at row {row}, column `{column}`")
            }
            SchemaError::NonFinite { row, column } => {
                write!(f, "non-finite value at row {row}, column `{column}`")
            }
            SchemaError::BinaryViolation { row, column, value } => {
                write!(f, "binary column `{column}` holds {value} at row {row}")
            }
            SchemaError::WrongKind { column, expected } => {
                write!(f, "column `{column}` must be declared {expected}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    InvalidInput(String),
    /// An iterative routine ran out of its iteration budget.
    NumericalFailure(String),
    NotPsd {
        min_eigenvalue: f64,
    },
    SingularDesign,
    DegenerateLabels,
    /// A cross-fitting training split lacks rows from a stratum the score needs.
    InsufficientStratum {
        fold: usize,
        stratum: String,
    },
    Schema(SchemaError),
    OutOfRange {
        row: usize,
        column: usize,
        value: f64,
    },
    Unsupported(String),
    /// The standardized statistic's scale `‖Σ̂‖_F` is zero.
    DegenerateScale,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::NumericalFailure(m) => write!(f, "numerical failure: {m}"),
            Error::NotPsd { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (eigenvalue {min_eigenvalue:e})")
            }
            Error::SingularDesign => f.write_str("design matrix is rank deficient"),
            Error::DegenerateLabels => f.write_str("binary response contains a single class"),
            Error::InsufficientStratum { fold, stratum } => {
                write!(f, "training data for fold {fold} has no rows with {stratum}")
            }
            Error::Schema(e) => write!(f, "schema error: {e}"),
            Error::OutOfRange { row, column, value } => write!(
                f,
                "covariate value {value} at row {row}, column {column} lies outside its declared range"
            ),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::DegenerateScale => f.write_str("standardization scale is zero"),
        }
    }
}

impl core::error::Error for Error {}
impl core::error::Error for SchemaError {}

impl From<SchemaError> for Error {
    fn from(e: SchemaError) -> Self {
        Error::Schema(e)
    }
}
