use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Variants are grouped by how the CLI reports them: input/validation
/// problems, numerical failures, and usage mistakes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    NotFound(String),
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("line {line}: field `{field}` is not numeric: `{value}`")]
    NonNumeric {
        line: usize,
        field: String,
        value: String,
    },
    #[error("line {line}: {reason}")]
    InvalidRecord { line: usize, reason: String },
    #[error("empty cohort")]
    EmptyCohort,
    #[error("constant column `{0}`")]
    ConstantColumn(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("labels contain a single class")]
    SingleClass,
    #[error("rank-deficient design matrix")]
    RankDeficient,
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("degenerate comparison: {0}")]
    Degenerate(String),
    #[error("load case `{case}` failed: {source}")]
    LoadCase {
        case: String,
        #[source]
        source: Box<Error>,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the input data.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::RankDeficient
            | Error::Singular(_)
            | Error::NoConvergence(_)
            | Error::NonFinite(_)
            | Error::Degenerate(_) => true,
            Error::LoadCase { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        let path = path.as_ref().display().to_string();
        if source.kind() == std::io::ErrorKind::NotFound {
            return Error::NotFound(format!("file not found: {path}"));
        }
        Error::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
