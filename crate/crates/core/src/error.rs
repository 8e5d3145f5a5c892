use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite entry in {0}")]
    NonFinite(String),
    #[error("non-invertible density")]
    NonInvertible,
    #[error("not a density: {0}")]
    NotDensity(String),
    #[error("invalid exponent: {0}")]
    Exponent(String),
    #[error("indices outside the admissible solid: {0}")]
    OutsideSolid(String),
    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),
    #[error("no closed form: {0}")]
    NoClosedForm(String),
    #[error("infeasible factorization: {0}")]
    Infeasible(String),
    #[error("dimension cap exceeded: {0}")]
    Cap(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}
