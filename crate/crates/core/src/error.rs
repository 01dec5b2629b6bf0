use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator sets differ: (n={0}, m={1}) vs (n={2}, m={3})")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("exp_even needs an even element, found a term of degree {0}")]
    Parity(u32),

    #[error("jet has a vanishing constant term")]
    SingularJet,

    #[error("jet order exhausted")]
    InsufficientOrder,

    #[error("jets expanded at different basepoints")]
    BasepointMismatch,

    #[error("metric is singular at the basepoint")]
    SingularMetric,

    #[error("{what}: the two routes disagree by {diff:e}")]
    Consistency { what: String, diff: f64 },

    #[error("section vanishes at the basepoint")]
    OnZeroSet,

    #[error("section is not holomorphic (dbar of entry {0} is nonzero)")]
    NotHolomorphic(usize),

    #[error("wrong bidegree: {0}")]
    Degree(String),

    #[error("endomorphism-valued form is not hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("matrix has eigenvalue {0:e} below the tolerance")]
    NegativeEigenvalue(f64),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("ill-conditioned extrapolation fit (condition number {0:e})")]
    IllConditioned(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
