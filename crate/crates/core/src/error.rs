use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter spec: {0}")]
    InvalidSpec(String),
    #[error("no prime found within {0} candidates")]
    SearchExhausted(u64),
    #[error("phase {0} has a denominator not dividing p-1")]
    IncompatiblePhase(String),
    #[error("zero has no multiplicative order")]
    ZeroElement,
    #[error("bad modulus {0}: need 4 | M and 2M | p-1")]
    BadModulus(u64),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("wrong domain: {0}")]
    WrongDomain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("value overflows double range")]
    Overflow,
    #[error("inadmissible form: {0}")]
    InadmissibleForm(String),
    #[error("inadmissible result: {0}")]
    InadmissibleResult(String),
    #[error("bad time parameter t={0}: need t != 0 and 4|t| | N")]
    BadTime(i64),
    #[error("bad coset: {0}")]
    BadCoset(String),
    #[error("not a bijection: {0}")]
    NotABijection(String),
    #[error("degenerate composition: intermediate quadratic coefficient vanishes")]
    DegenerateComposition,
    #[error("unsupported summation: {0}")]
    Unsupported(String),
    #[error("summand not periodic in {0}")]
    NonPeriodic(String),
    #[error("divergent pairing: {0}")]
    DivergentPairing(String),
    #[error("quadrature not converged: {0}")]
    NonConvergent(String),
    #[error("caustic: sin(omega t) = 0")]
    Caustic,
    #[error("non-normalizable state: {0}")]
    NonNormalizable(String),
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("degree error at {line}:{col}: phase polynomial has degree {degree} > 2")]
    Degree { line: usize, col: usize, degree: usize },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("zero quadratic coefficient for {0} in strict mode")]
    ZeroQuadratic(String),
    #[error("nonquadratic after combination: {0}")]
    NonQuadratic(String),
    #[error("cannot parse coefficient: {0}")]
    CoeffParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
