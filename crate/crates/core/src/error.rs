use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is reducible: support graph has {components} strongly connected components")]
    ReducibleMatrix { components: usize },

    #[error("iteration did not converge within {iterations} steps (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid row {row}: {reason}")]
    InvalidRow { row: usize, reason: String },

    #[error("invalid probability vector: {0}")]
    InvalidVector(String),

    #[error("mixing-time cap of {cap} steps exceeded (last diameter {last_diameter})")]
    CapExceeded { cap: usize, last_diameter: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("states {0:?} cannot reach the target set")]
    Unreachable(Vec<usize>),

    #[error("target set covers the whole state space")]
    EmptyComplement,

    #[error("rows {0:?} differ between P and the perturbed matrix but lie outside W")]
    SupportViolation(Vec<usize>),

    #[error("node {0} has zero out-degree")]
    ZeroDegree(usize),

    #[error("operation disconnects the graph: {0}")]
    Disconnects(String),

    #[error("bound violated: {name} = {bound} < exact {exact}")]
    BoundViolated { name: &'static str, bound: f64, exact: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            message: e.to_string(),
        }
    }
}
