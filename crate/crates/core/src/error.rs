use thiserror::Error;

/// Every failure the toolkit reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite amplitude at index {index}")]
    NonFinite { index: usize },
    #[error("vector norm {norm} differs from 1 by more than {tolerance:e}")]
    Normalization { norm: f64, tolerance: f64 },
    #[error("vectors are not orthonormal (Gram residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("seed vector {index} is linearly dependent on its predecessors (residual {residual:e})")]
    RankDeficiency { index: usize, residual: f64 },
    #[error("context weights sum to zero")]
    DegenerateContext,
    #[error("the two contexts share no outcome vector")]
    EmptySharedSet,
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("outcome projectors span rank {rank}, need {required}")]
    SpanDeficiency { rank: usize, required: usize },
    #[error("state coincides with basis vector {index}, its complement is empty")]
    DegenerateCollapse { index: usize },
    #[error("state has {nonzero} nonzero amplitudes, at least 3 are required")]
    InsufficientSupport { nonzero: usize },
    #[error("scalar rule `{0}` cannot be evaluated exactly")]
    Exactness(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("joint state is not in Schmidt form for the given bases (off-diagonal amplitude {off_diagonal:e})")]
    SchmidtForm { off_diagonal: f64 },
    #[error("split moduli miss |c_2|^2 by {residual:e}")]
    SplitConstraint { residual: f64 },
    #[error("no table entry for {0}")]
    MissingTableEntry(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn dim_mismatch(what: &str, expected: usize, found: usize) -> Error {
    Error::Dimension(format!("{what}: expected {expected}, found {found}"))
}
