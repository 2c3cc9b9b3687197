use thiserror::Error;

pub type Result<T> = std::result::Result<T, LcsmError>;

#[derive(Debug, Error)]
pub enum LcsmError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The basis matrix at `index` (0-based, in basis order) lies in the span
    /// of the ones before it.
    #[error("linearly dependent basis: matrix {index} is in the span of the preceding matrices ({detail})")]
    Dependency { index: usize, detail: String },

    #[error("coordinate descent did not converge after {iterations} cycles{}", lambda_suffix(*.lambda_index))]
    NonConvergence {
        iterations: usize,
        lambda_index: Option<usize>,
        last: Vec<f64>,
    },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn lambda_suffix(index: Option<usize>) -> String {
    match index {
        Some(i) => format!(" at lambda index {i}"),
        None => String::new(),
    }
}

impl LcsmError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LcsmError::InvalidInput(msg.into())
    }

    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            LcsmError::InvalidInput(_) => "invalid-input",
            LcsmError::DimensionMismatch { .. } => "dimension-mismatch",
            LcsmError::Dependency { .. } => "dependency",
            LcsmError::NonConvergence { .. } => "non-convergence",
            LcsmError::DegenerateData(_) => "degenerate-data",
            LcsmError::Parse { .. } => "parse",
            LcsmError::Io(_) => "io",
        }
    }

    /// True for failures of the numerical procedure rather than of the input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            LcsmError::Dependency { .. } | LcsmError::NonConvergence { .. }
        )
    }
}
