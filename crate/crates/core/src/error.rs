use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building, correcting or certifying a network.
#[derive(Debug, Error)]
pub enum Error {
    #[error("incidence matrix has rank {rank}, expected full row rank {nodes}")]
    RankDeficient { nodes: usize, rank: usize },

    #[error("degenerate network: {nodes} nodes and {links} links (need n >= 1, l >= 2 and l > n)")]
    DegenerateNetwork { nodes: usize, links: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "no base set within the monitored links: some link flows cannot be estimated from the \
         available data and the problem is unsolvable"
    )]
    NoBaseSet,

    #[error("complement columns of the base set are singular (pivot {pivot:e})")]
    SingularComplement { pivot: f64 },

    #[error("singular matrix (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("restricted kernel basis does not have full column rank")]
    NotFullColumnRank,

    #[error("problem size {size} exceeds the exact oracle cap of {cap}")]
    OracleTooLarge { size: usize, cap: usize },

    #[error("direction vanishes on the queried subset; the quotient is undefined")]
    DegenerateDirection,

    #[error("every kernel direction vanishes on the queried subset (recoverability is +inf)")]
    DegenerateSubset,

    #[error("recoverability {0} does not exceed 1; the stability bound does not apply")]
    InvalidAlpha(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("subset link {0} is not monitored")]
    SubsetNotMonitored(String),

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),

    #[error("ground truth is missing link {0}")]
    MissingGroundTruth(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rejections raised while reading a network document or building a [`crate::Network`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported document: {0}")]
    UnsupportedFormat(String),

    #[error("link {link} references unknown node {node}")]
    UnknownNode { link: String, node: String },

    #[error("unknown link {0}")]
    UnknownLink(String),

    #[error("duplicate identifier {0}")]
    DuplicateId(String),

    #[error("invalid link {link}: {reason}")]
    InvalidLink { link: String, reason: String },

    #[error("negative count {value} on link {link}")]
    NegativeCount { link: String, value: f64 },

    #[error("non-finite count on link {0}")]
    NonFiniteCount(String),

    #[error("observation for link {0}, which is not monitored")]
    UnmonitoredObservation(String),

    #[error("monitored link {0} has no observation")]
    MissingObservation(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoBaseSet => 2,
            Error::Parse(_)
            | Error::RankDeficient { .. }
            | Error::DegenerateNetwork { .. }
            | Error::SubsetNotMonitored(_) => 3,
            Error::DegenerateSubset => 4,
            _ => 1,
        }
    }
}
