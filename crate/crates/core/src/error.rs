use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("amplitude vector has zero norm")]
    ZeroVector,

    #[error("amplitude vector contains non-finite entries")]
    NonFinite,

    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),

    #[error("site subset is empty")]
    EmptySubset,

    #[error("site {site} out of range for {num_sites} sites")]
    SiteOutOfRange { site: usize, num_sites: usize },

    #[error("duplicate site {0} in subset")]
    DuplicateSite(usize),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("state shapes differ: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("incompatible lattice dimensions: {0}")]
    IncompatibleLattice(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incomplete Kraus set: {0}")]
    IncompleteKraus(String),

    #[error("strategy undefined at round {round} for history {history}")]
    UndefinedStrategy { round: usize, history: String },

    #[error("branch tree is incomplete: dropped probability mass {0:e}")]
    IncompleteTree(f64),

    #[error("E_g estimate does not belong to this state: {0}")]
    MismatchedEstimate(String),

    #[error("protocol menu is empty")]
    EmptyMenu,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("incompatible estimator and ensemble: {0}")]
    Incompatible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
