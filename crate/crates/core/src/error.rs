use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph infeasible for given parameters ({rejected} proposals rejected)")]
    GraphInfeasible { rejected: u64 },

    #[error("coincident spin positions at sites {0} and {1}")]
    CoincidentPositions(usize, usize),

    #[error("graph rule violated: {0}")]
    GraphRule(String),

    #[error("scale not resolved; increase t_max")]
    ScaleNotResolved,

    #[error(
        "step too large; reduce duration or raise budget \
         (error estimate {estimate:e} after {dim} Krylov vectors)"
    )]
    KrylovNotConverged { estimate: f64, dim: usize },

    #[error("internal consistency failure: norm drift {0:e}")]
    NormDrift(f64),

    #[error("replica form available only at theta=pi/2")]
    ReplicaAngle,

    #[error("no closed form for this regime; use the toggling-frame oracle (N={n}, theta={theta}, gamma={gamma})")]
    ClosedFormUnavailable { n: usize, theta: f64, gamma: f64 },

    #[error("threshold not reached (last value {last})")]
    ThresholdNotReached { last: f64 },

    #[error("dense paths are limited to L <= {max}, got L = {sites}")]
    TooLarge { sites: usize, max: usize },

    #[error("site count mismatch: expected {expected}, found {found}")]
    SiteMismatch { expected: usize, found: usize },

    #[error("pairing test requires even L, got L = {0}")]
    OddSiteCount(usize),

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    #[error("undefined phase: magnetization magnitude below 1e-12")]
    UndefinedPhase,

    #[error("parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}
