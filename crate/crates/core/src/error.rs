use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coefficient index {index} is beyond truncation order {order}")]
    CoefficientOutOfRange { index: usize, order: usize },

    #[error("fixed-point equation T = λ + f(T) is degenerate at linear order (g_1 = 1)")]
    DegenerateLinearTerm,

    #[error("f must vanish at T = 0, got constant term {0}")]
    NonzeroConstantTerm(String),

    #[error("multicriticality order must be at least 2, got {0}")]
    InvalidOrder(usize),

    #[error("weight set is not {claimed}-multicritical at T_c = {t_c}: derivative of order {order} is {value}")]
    NotMulticritical { claimed: usize, t_c: String, order: usize, value: String },

    #[error("custom weight sets need an explicit critical point T_c")]
    MissingCriticalPoint,

    #[error("partition function Z_{0} vanishes; normalized observables are undefined")]
    ZeroPartitionFunction(usize),

    #[error("tree enumeration limited to {max} leaves, asked for {requested}")]
    OracleBound { requested: usize, max: usize },

    #[error("unary vertices (g_1 != 0) make the fixed-size ensemble infinite")]
    UnaryVertices,

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: estimated error {achieved:e} above tolerance {requested:e}")]
    QuadratureFailed { achieved: f64, requested: f64 },

    #[error("hypergeometric lower parameter b_{index} = {value} is a non-positive integer")]
    HypergeometricPole { index: usize, value: String },

    #[error("precision cap of {cap} digits reached (estimated error 1e{log10_error:.1})")]
    PrecisionExhausted { cap: u32, log10_error: f64 },

    #[error("two routes disagree: {0}")]
    RouteMismatch(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
