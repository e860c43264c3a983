use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("digit {digit} at position {index} is out of range for p = {p}")]
    DigitOutOfRange { index: usize, digit: u64, p: u32 },
    #[error("digit vector is empty")]
    EmptyDigits,
    #[error("denominator is divisible by p = {0}")]
    DenominatorDivisibleByP(u32),
    #[error("denominator is zero")]
    ZeroDenominator,
    #[error("requested {requested} digits but precision is {precision}")]
    PrecisionExceeded { requested: u64, precision: u64 },
    #[error("linear form with x = y = 0")]
    ZeroForm,
    #[error("level {level} is out of range 1..={precision}")]
    LevelOutOfRange { level: u64, precision: u64 },
    #[error("no admissible pair at level {0}")]
    DegenerateLevel(u64),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
