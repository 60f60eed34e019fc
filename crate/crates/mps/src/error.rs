use thiserror::Error;
use tnkit_core::TensorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MpsError {
    #[error(transparent)]
    Tensor(#[from] TensorError),

    #[error("unknown site type `{0}`")]
    UnknownSiteType(String),
    #[error("site type `{0}` is already registered")]
    AlreadyRegistered(String),
    #[error("invalid site type `{tag}`: {reason}")]
    BadSiteDef { tag: String, reason: String },
    #[error("no registered site type on index {0}")]
    NoSiteType(String),
    #[error("no site type on index {index} defines operator `{name}`")]
    UnknownOp { name: String, index: String },
    #[error("no site type on index {index} defines state `{name}`")]
    UnknownState { name: String, index: String },
    #[error("site types {tags:?} on one index all define `{name}`")]
    Ambiguous { name: String, tags: Vec<String> },
    #[error("site type `{0}` has no quantum numbers")]
    NoQns(String),

    #[error("operator term has no factors")]
    EmptyTerm,
    #[error("site {site} outside 1..={n}")]
    SiteOutOfRange { site: usize, n: usize },
    #[error("terms carry different total fluxes {0} and {1}")]
    MixedFlux(String, String),

    #[error("chain mismatch: {0}")]
    Mismatch(String),
    #[error("chain must have at least one site")]
    EmptyChain,
    #[error("zero vector")]
    ZeroVector,
    #[error("invalid sweep schedule: {0}")]
    BadSweeps(String),
    #[error("orthogonality limits ({llim}, {rlim}) do not place the center on bond {bond}")]
    CenterMisplaced { bond: usize, llim: usize, rlim: usize },
    #[error("DMRG needs at least two sites")]
    TooShort,
}

pub type Result<T, E = MpsError> = std::result::Result<T, E>;
