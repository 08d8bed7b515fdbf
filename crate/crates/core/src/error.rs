use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("target degree {target} is below the polynomial degree {degree}")]
    DegreeTooLow { degree: usize, target: usize },

    #[error("index k={k} out of range for degree {d}")]
    IndexOutOfRange { k: usize, d: usize },

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("g must satisfy g(0)=0 and g(1)=1 (got g(0)={g0}, g(1)={g1})")]
    Endpoints { g0: f64, g1: f64 },

    #[error("f = g - x vanishes identically")]
    IdenticallyZero,

    #[error("degenerate zero of f near {at}")]
    DegenerateZero { at: f64 },

    #[error("nonlinearity is not bistable")]
    NotBistable,

    #[error("atom at {position} is not a multiple of the grid spacing {h}")]
    Incommensurate { position: f64, h: f64 },

    #[error("conditioning on null set (mass {mass})")]
    NullConditioning { mass: f64 },

    #[error("insufficient conditioning mass: {have} samples in interval, need {need}")]
    InsufficientConditioning { have: usize, need: usize },

    #[error("probability {0} outside (0,1)")]
    InvalidProbability(f64),

    #[error("offspring count {0} unsupported here")]
    UnsupportedOffspring(usize),

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
