use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("unknown identifier `{0}`")]
    UnknownId(String),
    #[error("composable pair ({g}, {h}) has no composite")]
    MissingComposite { g: String, h: String },
    #[error("composite listed for ({g}, {h}) is inconsistent with source/range data")]
    BadComposite { g: String, h: String },
    #[error("associativity fails on ({g}, {h}, {k})")]
    AssocViolation { g: String, h: String, k: String },
    #[error("no identity arrow for unit `{0}`")]
    MissingIdentity(String),
    #[error("bad inverse for `{0}`")]
    BadInverse(String),
    #[error("weight support mismatch: {0}")]
    SupportMismatch(String),
    #[error("action fibration mismatch at ({x}, {g})")]
    FibrationMismatch { x: String, g: String },
    #[error("measure not invariant, witness arrow `{0}`")]
    NotInvariant(String),
    #[error("subgroupoids intersect beyond the unit arrows at `{0}`")]
    IntersectionTooLarge(String),
    #[error("`{0}` does not factor through the two subgroupoids")]
    NotFactorizable(String),
    #[error("subgroupoid {which} is not closed: {detail}")]
    SubgroupoidNotClosed { which: usize, detail: String },
    #[error("Haar system of subgroupoid {which} fails: {detail}")]
    HaarFail { which: usize, detail: String },
    #[error("Haar decomposition fails, worst basis function `{worst}` (residual {residual:e})")]
    DecompositionFail { worst: String, residual: f64 },
    #[error("density is not constant on the fiber over `{0}`")]
    NotFiberConstant(String),
    #[error("unsupported map combination ({0}, {1})")]
    UnknownMapCombination(String, String),
    #[error("operator does not respect the fibered leg structure: {0}")]
    LegMismatch(String),
    #[error("theta is not a bijection: {0}")]
    ThetaNotBijective(String),
    #[error("operator span is not closed: {0}")]
    SpanNotClosed(String),
    #[error("operator is not in the carrier (residual {0:e})")]
    NotInCarrier(f64),
    #[error("phi is not involutive at `{0}`")]
    PhiNotInvolutive(String),
    #[error("weight is not faithful (min eigenvalue {0:e})")]
    NotFaithful(f64),
    #[error("group factorization is not exact: {0}")]
    NotExactFactorization(String),
    #[error("quotient map is not bijective: {0}")]
    NotBijective(String),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
}

pub type Result<T> = std::result::Result<T, Error>;
