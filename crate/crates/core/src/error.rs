use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension n={0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("grid too small: M={got}, need at least {min}")]
    GridTooSmall { got: usize, min: usize },

    #[error("grid mismatch: (n={left_n}, M={left_m}) vs (n={right_n}, M={right_m})")]
    GridMismatch {
        left_n: usize,
        left_m: usize,
        right_n: usize,
        right_m: usize,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("bump scale eta={eta:.3e} is under-resolved by grid spacing {spacing:.3e} (need spacing <= eta/3); increase M or eps")]
    UnderResolved { eta: f64, spacing: f64 },

    #[error("negative radial value {value} at node {index}")]
    NegativeRadius { index: usize, value: f64 },

    #[error("point lies outside (or too close to) the smoothed domain: radial margin {margin:.3e} < {required:.3e}")]
    DomainViolation { margin: f64, required: f64 },

    #[error("degenerate domain: y={0:.3e}")]
    DegenerateDomain(f64),

    #[error("exact ball kernel requested on a non-ball domain (relative oscillation {0:.3e})")]
    NotABall(f64),

    #[error("no closed-form averaged drift registered for rule set `{0}`")]
    NoClosedForm(String),

    #[error("rule set `{0}` is not scale invariant")]
    NotScaleInvariant(String),

    #[error("walk-on-spheres did not reach the boundary within {0} steps")]
    WalkDidNotExit(usize),

    #[error("operation `{0}` is not supported")]
    Unsupported(&'static str),

    #[error("monitor `{name}` triggered at t={time} (strict mode)")]
    MonitorTriggered { name: &'static str, time: f64 },

    #[error("non-positive radius {value} at node {index} during ODE integration")]
    NonPositiveState { index: usize, value: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
