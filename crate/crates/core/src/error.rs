use thiserror::Error;

/// Errors raised by the simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument fell outside the range an operation accepts.
    #[error("{name} = {value} is out of range (expected {expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A covariance matrix violates the uncertainty principle or is malformed.
    #[error("covariance matrix is not physical: {0}")]
    NonPhysical(String),

    #[error("mode index must be 1 or 2, got {0}")]
    ModeIndex(usize),

    /// Both hypotheses produce a noiseless count difference.
    #[error("degenerate scenario: count-difference standard deviations sum to zero")]
    Degenerate,

    #[error("truncation dimension must be at least 2, got {0}")]
    Truncation(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
