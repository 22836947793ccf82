use thiserror::Error;

/// Errors raised by the library. Every variant is a recoverable,
/// caller-visible condition; nothing here is a programming bug.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series truncated at {available}, but {required} is needed")]
    Truncation { required: u64, available: u64 },

    #[error("{0} is not an odd prime")]
    NotPrime(u64),

    #[error("{x} is a quadratic non-residue modulo {p}")]
    NonResidue { x: i64, p: u64 },

    #[error("{x} is divisible by {p}, so it has no canonical square root")]
    ZeroResidue { x: i64, p: u64 },

    #[error("closed form needs p not dividing uv (u={u}, v={v}, p={p}); use salie_direct")]
    SalieDegenerate { u: i64, v: i64, p: u64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("unknown built-in form `{0}`")]
    UnknownForm(String),

    #[error("range condition violated: {0}")]
    Range(String),

    #[error("not an eigenform: {0}")]
    NotEigen(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("did not converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
