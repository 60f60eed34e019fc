use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("name `{0}` is longer than 8 characters")]
    NameTooLong(String),
    #[error("name `{0}` contains a character outside [A-Za-z0-9=+-/._]")]
    BadNameChar(String),
    #[error("duplicate quantum number name `{0}`")]
    DuplicateQnName(String),
    #[error("quantum number modulus must be >= 1, got {0}")]
    BadModulus(i64),
    #[error("a QN holds at most 4 named charges")]
    QnCapacity,
    #[error("quantum number `{name}` combined with moduli {a} and {b}")]
    ModulusConflict { name: String, a: i32, b: i32 },

    #[error("a tag set holds at most 4 tags")]
    TooManyTags,
    #[error("index dimension must be positive")]
    ZeroDim,
    #[error("a QN index needs at least one subspace")]
    NoSubspaces,
    #[error("prime level would become negative")]
    NegativePrimeLevel,

    #[error("index appears more than once: {0}")]
    DuplicateIndex(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
    #[error("value {val} out of range for index of dimension {dim}")]
    OutOfRange { val: usize, dim: usize },
    #[error("element with flux {found} is inconsistent with tensor flux {expected}")]
    FluxViolation { expected: String, found: String },
    #[error("no block has flux {0}")]
    NoBlocksWithFlux(String),
    #[error("cannot set an off-diagonal element of diagonal storage")]
    OffDiagonal,
    #[error("tensor has {0} indices, expected a scalar")]
    NotScalar(usize),
    #[error("operation requires QN indices")]
    NotQn,
    #[error("contracted QN index {0} has the same arrow direction on both tensors")]
    ArrowMismatch(String),
    #[error("combiner does not match the tensor's indices")]
    CombinerMismatch,
    #[error("mixed storage: {0}")]
    MixedStorage(String),
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("label error: {0}")]
    Labels(String),
    #[error("block structure mismatch on contracted dimension {0}")]
    BlockStructure(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("row indices must be a nonempty proper subset of the tensor's indices")]
    Bipartition,
    #[error("truncation cutoff must be non-negative, got {0}")]
    NegativeCutoff(f64),
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T, E = TensorError> = std::result::Result<T, E>;
