use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("component {0} does not vanish at the origin")]
    NotBasedAtOrigin(usize),
    #[error("unknown variable `{0}`: only x and y are allowed")]
    TooManyVariables(String),
    #[error("truncation limit reached: {0}")]
    Truncation(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("arcs are indistinguishable up to the truncation order")]
    Indistinguishable,
    #[error("germ is not in the required shape: {0}")]
    Shape(String),
    #[error("ambiguous fiber count: {0}")]
    AmbiguousFiber(String),
    #[error("insufficient fiber separation: {0}")]
    InsufficientSeparation(String),
    #[error("mesh vertices are not connected")]
    Disconnected,
    #[error("no admissible projection after {0} trials")]
    ExhaustedTrials(usize),
    #[error("non-generic projection: {0}")]
    NonGeneric(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Truncation(_) | Error::ExhaustedTrials(_) | Error::Indistinguishable => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
