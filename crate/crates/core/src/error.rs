use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: found {found}, expected one of {}", expected.join(", "))]
    Syntax {
        line: usize,
        column: usize,
        found: String,
        expected: Vec<String>,
    },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("world {world} out of range (model has {worlds} worlds)")]
    WorldOutOfRange { world: usize, worlds: usize },

    #[error("frame is not weakly transitive: {0} R {1} R {2} but not {0} R {2}")]
    NotWeaklyTransitive(usize, usize, usize),

    #[error("search bound must be at least 1")]
    ZeroBound,

    #[error("malformed model: {0}")]
    MalformedModel(String),

    #[error("malformed tiling instance: {0}")]
    MalformedTiling(String),

    #[error("tiling exponent n = {0} is too large for exhaustive solving (n <= 2)")]
    TilingTooLarge(usize),

    #[error("not a solution: {0}")]
    InvalidSolution(String),

    #[error("witness rejected: {0}")]
    WitnessRejected(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
