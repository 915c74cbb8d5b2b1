use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid exponent recursion: 2*alpha[{index}+1] - alpha[{index}] = {denominator} is not positive")]
    InvalidAlpha { index: usize, denominator: f64 },

    #[error("polynomial is not monic (leading coefficient {0})")]
    NonMonic(f64),

    #[error("manifold gains are not Hurwitz")]
    NotHurwitz,

    #[error("invalid gains: {0}")]
    InvalidGains(&'static str),

    #[error("invalid Lyapunov split: theta = {theta} must lie in (0, {gamma})")]
    InvalidSplit { theta: f64, gamma: f64 },

    #[error("input gain is singular at t = {time}")]
    SingularGain { time: f64 },

    #[error("numeric blowup at t = {time}")]
    NumericBlowup { time: f64 },

    #[error("assumption violated at t = {time}: {what}")]
    Assumption { time: f64, what: &'static str },

    #[error("disturbance signal has no declared derivative bound")]
    MissingBound,

    #[error("scenarios are not comparable: {0}")]
    Mismatch(&'static str),
}

impl Error {
    /// Whether the error comes from rejecting a configuration before or
    /// during a run, as opposed to the integration diverging.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::NumericBlowup { .. })
    }
}
