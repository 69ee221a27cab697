//! Crate-wide error type. Variant names follow the operation contracts.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    LinAlg(#[from] numlin::LinAlgError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid configuration: {0}")]
    ConfigViolation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("label vectors of the weak and strong datasets differ")]
    LabelMismatch,
    #[error("input vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("heads live on different representation spaces")]
    SpaceMismatch,
    #[error("dataset carries no population summary")]
    MissingPopulation,
    #[error("dataset carries no test split")]
    MissingTestSplit,
    #[error("input has zero rank variance; correlation undefined")]
    ConstantInput,
    #[error("subspace selection kept no directions (threshold too high)")]
    EmptySubspace,
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("kernel is not positive semidefinite")]
    NonPsd,
    #[error("bad magic bytes in dataset file")]
    BadMagic,
    #[error("unsupported dataset file version {0}")]
    VersionMismatch(u32),
    #[error("dataset file ends prematurely")]
    TruncatedFile,
    #[error("non-finite entry in dataset")]
    NonFiniteEntry,
    #[error("precondition ratio {ratio:.4} exceeds bound {bound:.4}")]
    PreconditionRatioViolated { ratio: f64, bound: f64 },
    #[error("column {0:?} not present in sweep data")]
    MissingColumn(String),
    #[error("sweep data contains no rows")]
    EmptySweep,
}
