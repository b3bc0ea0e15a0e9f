use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported field order {0}")]
    UnsupportedOrder(u64),
    #[error("modulus {modulus:#x} is not an irreducible polynomial of degree {degree}")]
    ReducibleModulus { modulus: u32, degree: u32 },
    #[error("a modulus was given for prime field GF({0})")]
    UnexpectedModulus(u32),
    #[error("division by zero")]
    DivideByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("linear system is inconsistent")]
    Inconsistent,
    #[error("linear system is underdetermined")]
    Underdetermined,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("matrix is singular")]
    Singular,

    #[error("base code has no repair matrices")]
    MissingRepairMatrices,
    #[error("eigenvalue search exhausted after {0} attempts")]
    SearchExhausted(usize),
    #[error("repair system is rank deficient for node {0}")]
    RankDeficient(usize),
    #[error("selected nodes do not determine the data")]
    SingularSelection,
    #[error("expected {expected} distinct nodes, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: value {value} is not an element of GF({q})")]
    ValueOutOfField { line: usize, value: u64, q: u32 },

    #[error("permutation row {0} is not a bijection")]
    NotABijection(usize),
    #[error("theta parameter a={0} must differ from 0 and 1")]
    InvalidA(u32),
    #[error("theta table violates {{theta(j,l), theta(l,j)}} = {{1, a}} at ({0},{1})")]
    InvalidTheta(usize, usize),
    #[error("the transformation requires q >= 3")]
    BinaryField,
    #[error("per-helper repair matrices require a symmetric permutation family")]
    AsymmetricPermsWithPerHelperRepair,
    #[error("base code failed verification: {0}")]
    UnverifiedBase(String),
    #[error("theta pair system is singular")]
    ThetaSingular,
    #[error("reconstruction contract breach: {0}")]
    ContractBreach(String),
    #[error("stacked generator system is singular")]
    SingularSystem,

    #[error("node {0} is already failed")]
    AlreadyFailed(usize),
    #[error("node {0} is not failed")]
    NotFailed(usize),
    #[error("too many failed nodes: {0}")]
    TooManyFailures(usize),
    #[error("unsupported symbol mapping: {0}")]
    UnsupportedMapping(String),
    #[error("chunk format: {0}")]
    ChunkFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
