use thiserror::Error;

/// Failures raised by the geometry, covariance and solver routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriError {
    #[error("point is not in front of the camera (depth {depth})")]
    Cheirality { depth: f64 },

    #[error("invalid {what}: {reason}")]
    InvalidInput { what: &'static str, reason: String },

    #[error("rays are (nearly) parallel; the track cannot be triangulated")]
    DegenerateParallax,

    #[error("linear system is rank deficient")]
    RankDeficient,

    #[error("every enabled uncertainty source is zero; residual weights are undefined")]
    AllSourcesZero,

    #[error("a scale-dependent Jacobian needs a point or range hint")]
    MissingScale,

    #[error("intrinsic entry ({row}, {col}) is not a free parameter")]
    FixedIntrinsicEntry { row: usize, col: usize },

    #[error("two-view method given a track with {0} views")]
    TwoViewOnly(usize),

    #[error("internal numerical failure: {0}")]
    Internal(&'static str),
}

pub type Result<T, E = TriError> = std::result::Result<T, E>;

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> TriError {
    TriError::InvalidInput {
        what,
        reason: reason.into(),
    }
}
