use alloc::string::String;

/// Errors raised by the simulator, the environment and the learner.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0} must be at least 1")]
    ZeroDimension(&'static str),
    #[error("invalid dimension for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("zero-forcing precoder: channel matrix is rank deficient")]
    Singular,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{bs} base stations cannot each serve a user when there are only {ue} users")]
    InfeasibleAssociation { bs: usize, ue: usize },
    #[error("step called after the episode finished; call reset first")]
    EpisodeFinished,
    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
    #[error("exhaustive search needs {required} evaluations but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("exhaustive search needs a finite phase codebook")]
    ContinuousCodebook,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}
