use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus must be at least 2")]
    InvalidModulus,
    #[error("value has no inverse modulo the given modulus")]
    NoInverse,
    #[error("invalid group parameters: {0}")]
    InvalidParams(&'static str),
    #[error("parameter sizes rejected: need bits_q >= 8 and bits_p >= bits_q + 8 (got p={bits_p}, q={bits_q})")]
    InvalidSizes { bits_p: u64, bits_q: u64 },
    #[error("parameter generation gave up after {0} attempts")]
    GenerationFailed(usize),
    #[error("secret exponent must lie in [1, q-1]")]
    InvalidSecret,
    #[error("key rejected by registry: {0}")]
    RejectedKey(&'static str),
    #[error("message is not an element of Z_p^*")]
    InvalidMessage,
    #[error("field out of range: {0}")]
    OutOfRange(&'static str),
    #[error("authentication failed")]
    AuthenticationFailed,
    #[error("identity {0:?} is not registered")]
    UnknownIdentity(String),
    #[error("forgery resampling cap of {0} exceeded")]
    ForgeryFailed(usize),
}
