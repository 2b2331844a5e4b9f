use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures of the physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Invalid(String),

    #[error("entry is not channeled: transverse energy is {ratio:.6} of the well depth")]
    NotChanneled { ratio: f64 },

    #[error("entry point x0 = {x0:e} m lies outside the orbit range for amplitude A = {amp:e}")]
    InconsistentEntry { x0: f64, amp: f64 },

    #[error("principal arccot is singular at x = {x} (cos x = 0)")]
    PoleAtHalfPi { x: f64 },

    #[error("integration step {step:e} s exceeds tau/100 = {limit:e} s")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("integration would need {needed} steps, budget is {max_steps}")]
    StepBudgetExceeded { needed: usize, max_steps: usize },

    #[error("sample grids differ at index {index}")]
    GridMismatch { index: usize },

    #[error("every one of the {n_points} entries was rejected as not channeled")]
    AllRejected { n_points: usize },

    #[error("in-plane polarization vanishes, rotation angle undefined")]
    DegenerateInPlane,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
