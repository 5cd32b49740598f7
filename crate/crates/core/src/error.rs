use thiserror::Error;

/// Errors produced by the risk library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A closed-form formula was invoked outside the hypothesis under which
    /// it is valid (e.g. short puts, or more puts than shares).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested option budget cannot be spent within the constraints.
    #[error("infeasible budget {requested}: maximum feasible spend is {max_feasible}")]
    Infeasible { requested: f64, max_feasible: f64 },

    /// A one-dimensional search failed to bracket its target.
    #[error("bracket failure: {0}")]
    Bracket(String),

    /// A scenario configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
