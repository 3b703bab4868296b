use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the library. Resource exhaustion during expansion is
/// not an error: it is reported in-band as a truncated expansion status.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Parse(String),

    #[error("division by a zero divisor")]
    ZeroDivisor,

    #[error("not integral: {0}")]
    NotIntegral(String),

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("prime {0} is not ramified in this algebra")]
    NotRamified(u64),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("prescribed quotients are inconsistent: {0}")]
    InconsistentQuotients(String),

    #[error("prescribed quotients are not admissible: {0}")]
    NotAdmissible(String),

    #[error("denominator sequence is a zero divisor at index {0}")]
    SingularDenominator(usize),

    #[error("algebra is definite; no real 2x2 splitting")]
    NotSplittable,

    #[error("interval extends below zero")]
    NegativeInput,

    #[error("input is a scalar")]
    ScalarInput,

    #[error("admissibility failure: {0}")]
    AdmissibilityFailure(String),

    #[error("engine and replay recursion diverged: {0}")]
    Mismatch(String),

    #[error("could not saturate lattice to a ring within the search budget")]
    CannotSaturate,

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
