use thiserror::Error;

pub type MfResult<T> = Result<T, MfError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MfError {
    #[error("division by zero")]
    DivideByZero,
    #[error("not a monomial: {0}")]
    NonMonomial(String),
    #[error("dual subgroup requires a ball centered at 0")]
    NotCenteredAtZero,
    #[error("phase is not supported: {0}")]
    UnsupportedPhase(String),
    #[error("function is not integrable in x{0}")]
    NotIntegrable(usize),
    #[error("function is not integrable in x{var}: {packet}")]
    NotIntegrablePacket { var: usize, packet: String },
    #[error("function is not bounded")]
    NotBounded,
    #[error("function is not invariant under the subgroup")]
    NotHInvariant,
    #[error("function is not Schwartz-Bruhat")]
    NotSchwartz,
    #[error("hypothesis {0} of the Poisson formula fails")]
    HypothesisFailed(u8),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("both convolution factors are unbounded")]
    UnboundedBothFactors,
    #[error("cannot split polynomial over Q(i): {0}")]
    CannotSplit(String),
    #[error("jacobian of a non-square map")]
    NonSquare,
    #[error("value group element {0} is not an integer")]
    NonIntegralGamma(String),
    #[error("level {level} too small for exponent {exponent}")]
    InsufficientLevel { level: u32, exponent: i64 },
    #[error("prime {0} is not 1 mod 4")]
    BadPrime(u64),
    #[error("coefficient {0} does not reduce to a unit")]
    BadReduction(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    SyntaxError { line: usize, col: usize, msg: String },
    #[error("undefined name `{0}`")]
    UndefinedName(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}
