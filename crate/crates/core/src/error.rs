use thiserror::Error;

/// Errors raised by circuit construction, expansion and the decision procedures.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undefined gate `{name}`")]
    UndefinedGate { line: usize, name: String },
    #[error("line {line}: gate `{name}` defined twice")]
    DuplicateGate { line: usize, name: String },
    #[error("cycle through gate `{0}`")]
    Cycle(String),
    #[error("circuit has more than one sink: {0}")]
    MultipleSinks(String),
    #[error("no `out` statement")]
    MissingOutput,
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` has no value")]
    UnboundVariable(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("circuit is not multiplicatively disjoint")]
    NotMultDisjoint,
    #[error("circuit is not monotone")]
    NotMonotone,
    #[error("invalid parse tree encoding: {0}")]
    InvalidEncoding(String),
    #[error("invalid parse tree type: {0}")]
    InvalidType(String),
    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),
    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance too large: {0}")]
    SizeGuard(String),
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
