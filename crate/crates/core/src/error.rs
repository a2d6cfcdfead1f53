use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants carry enough context to reproduce the failing call: the offending
/// field element, matrix or prime is rendered into the message.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} is not an odd prime below 2^20")]
    BadPrime(u64),

    #[error("polynomial is not irreducible over F_{p}: {poly:?}")]
    Reducible { p: u64, poly: Vec<u64> },

    #[error("matrix is not symplectic")]
    NotSymplectic,

    #[error("degenerate centralizer: {0}")]
    DegenerateCentralizer(String),

    #[error("torus is not maximal: {0}")]
    NotMaximal(String),

    #[error("character formula undefined: det(g - I) = 0")]
    CharacterFormulaUndefined,

    #[error("singular g - I at torus element {witness:?}")]
    SingularElement { witness: Vec<u64> },

    #[error("Weil representation over F_3 in dimension 2 has no canonical linearization")]
    AmbiguousLinearization,

    #[error("no generic factorization found after {0} attempts")]
    FactorizationSearch(usize),

    #[error("dimension {dim} exceeds the supported bound {bound}")]
    TooLarge { dim: u64, bound: u64 },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
