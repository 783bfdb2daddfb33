use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {0} is outside [0, 1)")]
    OutOfDomain(f64),

    #[error("operation requires an interval map, got a subshift of finite type")]
    NotAMap,

    #[error("derivative unavailable at non-differentiable branch endpoint x = {0}")]
    DerivativeUnavailable(f64),

    #[error("word {0} is not admissible")]
    Inadmissible(String),

    #[error("periodic point search did not converge for word {0}")]
    NoConvergence(String),

    #[error("admissible word count {count} exceeds budget {budget}")]
    BudgetExceeded { count: u128, budget: u128 },

    #[error("transition graph is not irreducible")]
    NotIrreducible,

    #[error("target mean {target} outside achievable range ({min}, {max})")]
    TargetUnachievable { target: f64, min: f64, max: f64 },

    #[error("expanding set is empty")]
    EmptySet,

    #[error("oracle unavailable: {0}")]
    OracleUnavailable(String),

    #[error("no convergence after {iterations} iterations (partial value {partial})")]
    NonConvergence { iterations: usize, partial: f64 },

    #[error("both deviation sides are unachievable; the bound is -infinity")]
    BoundIsMinusInfinity,

    #[error("subshift has no geometric weights; expansion data unavailable")]
    MissingGeometricWeights,

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
