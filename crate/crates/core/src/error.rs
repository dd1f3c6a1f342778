use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large: p*p must fit in 64 bits")]
    ModulusTooLarge(u64),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("elements of GF({0}) and GF({1}) cannot be mixed")]
    MixedFields(u64, u64),
    #[error("duplicate evaluation point x = {0}")]
    DuplicateX(u64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("bad threshold: k = {k} with n = {n}")]
    BadThreshold { k: usize, n: usize },
    #[error("participant count {0} outside 1..=20")]
    BadParticipantCount(usize),
    #[error("coalitions must be nonempty")]
    EmptyCoalition,
    #[error("participant {participant} outside 1..={n}")]
    OutOfRangeParticipant { participant: usize, n: usize },
    #[error("the list of coalitions is empty")]
    EmptyList,
    #[error("n = {n} shares need n < p = {p}")]
    TooManyParticipants { n: usize, p: u64 },
    #[error("audit too large: {0}")]
    AuditTooLarge(String),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bad utility parameters: {0}")]
    BadUtilities(String),
    #[error(
        "participant {participant}: N = {value} equals c; the characterization needs N_i != c"
    )]
    DegenerateTie { participant: usize, value: f64 },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("greedy utilities violate the ordinal axioms: A = {reward} <= B*(n-1) = {bound}")]
    AxiomViolation { reward: f64, bound: f64 },
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("access structure is not a threshold structure")]
    NotThreshold,
}

pub type Result<T> = std::result::Result<T, Error>;
