//! Engine-wide error type.

use crate::exact::ExactError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("atom outside the reducible family: {0}")]
    NonReducibleAtom(String),
    #[error("no derivation rule for atom: {0}")]
    UnknownAtomDerivative(String),
    #[error("illegal modular weight: {0}")]
    IllegalWeight(String),
    #[error("symbolic normal form has a pole at m = 2; use fixed-m(2)")]
    MTwoSingularity,
    #[error("contraction hits a pole: {0}")]
    PoleAtContraction(String),
    #[error("unsupported atom for this operator: {0}")]
    UnsupportedAtom(String),
    #[error("operand arity mismatch: {0}")]
    Arity(String),
    #[error("branch point: argument outside the real branch (z < 1)")]
    BranchPoint,
    #[error("series/quadrature failed to converge: {0}")]
    NonConvergence(String),
    #[error("tau must have positive imaginary part")]
    InvalidTau,
    #[error("symbolic zero-test backends disagree: {0}")]
    BackendMismatch(String),
}

pub type EngineResult<T> = Result<T, EngineError>;
