use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("polynomial is not Eisenstein at p = {0}")]
    NotEisenstein(u64),
    #[error("precision {got} too small, need at least {need}")]
    PrecisionTooSmall { got: u32, need: u32 },
    #[error("precision {0} does not fit in machine words for this prime")]
    PrecisionTooLarge(u32),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("unsupported ramification degree {0}")]
    UnsupportedDegree(u32),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("singular matrix")]
    Singular,
    #[error("gamma - 1 is singular")]
    SingularGammaMinusOne,
    #[error("relation violated, residual {0}")]
    RelationViolated(String),
    #[error("element is not regular (kernel dimension {0})")]
    NotRegular(usize),
    #[error("torus does not satisfy the product condition: {0}")]
    ClubsuitViolated(String),
    #[error("enumeration window overflow: {0}")]
    WindowOverflow(String),
    #[error("nonzero contribution on truncation boundary: {0}")]
    TailNonzero(String),
    #[error("coefficients do not stabilize: {0}")]
    NoStabilization(String),
    #[error("pole of the closed form off u = 1: {0}")]
    UnexpectedPole(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
