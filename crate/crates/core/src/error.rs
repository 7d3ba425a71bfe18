use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("size cap exceeded: {0}")]
    SizeCapExceeded(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} does not divide {1}")]
    NotADivisor(u32, u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty input")]
    EmptyInput,
    #[error("incompatible parameters: {0}")]
    IncompatibleParameters(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("operation requires a {0} form")]
    KindMismatch(String),
    #[error("form is degenerate on the given subspace")]
    DegenerateRestriction,
    #[error("generation failed: {0}")]
    GenerationFailed(String),
    #[error("degree cap exceeded: {0} > {1}")]
    DegreeCapExceeded(u64, u64),
    #[error("orbit not closed: {0}")]
    OrbitNotClosed(String),
    #[error("search budget exceeded (lower {lower}, upper {upper:?})")]
    BudgetExceeded { lower: usize, upper: Option<usize> },
    #[error("orbit is empty: {0}")]
    OrbitEmpty(String),
    #[error("action is not faithful modulo scalars, no base exists: {0}")]
    UnfaithfulAction(String),
    #[error("construction does not apply: {0}")]
    ProofCaseInapplicable(String),
    #[error("vectors are linearly dependent")]
    IndependenceViolated,
    #[error("radical not found")]
    RadicalNotFound,
    #[error("missing field: {0}")]
    MissingField(String),
    #[error("formula inapplicable: {0}")]
    FormulaInapplicable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
