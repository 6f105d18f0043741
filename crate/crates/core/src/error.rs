use thiserror::Error;

/// Errors surfaced by the library.
///
/// `NotSatisfied` is returned by decryption entry points when the key's
/// attributes cannot satisfy the ciphertext policy; policy selection itself
/// reports that as `None`.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("element belongs to a different pairing context ({0})")]
    ContextMismatch(String),
    #[error("invalid attribute name {0:?}")]
    InvalidAttribute(String),
    #[error("polynomial degree must be at least 1, got {0}")]
    InvalidDegree(usize),
    #[error("duplicate interpolation point")]
    DuplicatePoint,
    #[error("interpolation target coincides with a share point")]
    DegenerateTarget,
    #[error("secret reconstruction failed: {0}")]
    ReconstructionFailure(String),
    #[error("policy syntax error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("threshold {threshold} out of range for {children} children")]
    Threshold { threshold: usize, children: usize },
    #[error("attribute set must be nonempty")]
    InvalidAttributeSet,
    #[error("requested attributes are not a subset of the key's attributes")]
    NotASubset,
    #[error("key attributes do not satisfy the policy")]
    NotSatisfied,
    #[error("malformed decryption input: {0}")]
    DecryptionError(String),
    #[error("decryption failed")]
    DecryptionFailed,
    #[error("revocation list holds {requested} users but capacity is {capacity}")]
    RevocationCapacityExceeded { requested: usize, capacity: usize },
    #[error("unknown user {0}")]
    UnknownUser(String),
    #[error("requester identity is revoked")]
    RequesterRevoked,
    #[error("conversion request carries no components")]
    EmptyRequest,
    #[error("conversion bundle does not match the ciphertext: {0}")]
    BundleMismatch(String),
    #[error("Lagrange coefficient must be nonzero")]
    InvalidCoefficient,
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("invalid component: {0}")]
    InvalidComponent(String),
    #[error("admin token rejected")]
    Unauthorized,
    #[error("proxy key version {offered} does not advance past {current}")]
    StaleKey { offered: u64, current: u64 },
    #[error("proxy runs in {0} mode")]
    ModeMismatch(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
