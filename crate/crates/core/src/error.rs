use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("feature vectors differ in dimension ({left} vs {right})")]
    DimensionMismatch { left: usize, right: usize },

    #[error("externality map is not monotonically increasing: {0}")]
    NonMonotoneMap(String),

    #[error("strategy violates feasibility for signal {signal}: {reason}")]
    Infeasible { signal: char, reason: String },

    #[error("follower coefficient A must be non-negative, got {0}")]
    NegativeCoefficient(f64),

    #[error("threshold-degenerate game: -y_B - z/2 = 0, the sub-threshold signaling formula is undefined")]
    ThresholdDegenerate,

    #[error("arm {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("arm {0} has zero probability and cannot have been sampled")]
    ZeroProbabilityArm(usize),

    #[error("gain {0} outside [0, 1]")]
    GainOutOfRange(f64),

    #[error("value {value} outside normalization bounds [{min}, {max}]")]
    OutOfBounds { value: f64, min: f64, max: f64 },

    #[error("theory tuning infeasible: {0}")]
    TheoryInfeasible(String),

    #[error("stackelberg initialization requested without an equilibrium")]
    MissingEquilibrium,

    #[error("kappa = {0} <= 0: payments cannot make the target profile dominant")]
    NonPositiveKappa(f64),

    #[error("config: {0}")]
    Config(String),

    #[error("refusing to overwrite existing file {0} (pass --force)")]
    WouldClobber(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Whether the error stems from user input rather than from running.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Io(_) | Error::WouldClobber(_) | Error::OutOfBounds { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
