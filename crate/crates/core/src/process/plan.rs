use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which times of a run are recorded as full domain snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SnapshotPlan {
    /// `0` and `count` geometrically spaced times ending at the horizon,
    /// starting at `horizon * ratio^(count-1)`.
    Geometric {
        count: usize,
        #[serde(default = "default_ratio")]
        ratio: f64,
    },
    /// `count + 1` equally spaced times from 0 to the horizon.
    Uniform { count: usize },
    /// `t_k = T (k / count)²`, so equal color bands mark equal increments of `√t`.
    Quadratic { count: usize },
    /// Explicit times in `[0, T]`.
    Times { times: Vec<f64> },
    /// `0`, every jump, and the horizon.
    EveryJump,
}

fn default_ratio() -> f64 {
    0.5
}

impl Default for SnapshotPlan {
    fn default() -> Self {
        SnapshotPlan::Geometric {
            count: 12,
            ratio: default_ratio(),
        }
    }
}

impl SnapshotPlan {
    /// Fixed snapshot times for a horizon, or `None` for [`SnapshotPlan::EveryJump`].
    pub fn times(&self, horizon: f64) -> Result<Option<Vec<f64>>> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::invalid("horizon", "must be finite and positive"));
        }
        let mut t = match self {
            SnapshotPlan::EveryJump => return Ok(None),
            SnapshotPlan::Geometric { count, ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::invalid("ratio", "must lie in (0, 1)"));
                }
                let mut t = vec![0.0];
                t.extend((0..*count).rev().map(|k| horizon * ratio.powi(k as i32)));
                t
            }
            SnapshotPlan::Uniform { count } => (0..=*count)
                .map(|k| horizon * k as f64 / (*count).max(1) as f64)
                .collect(),
            SnapshotPlan::Quadratic { count } => (0..=*count)
                .map(|k| {
                    let s = k as f64 / (*count).max(1) as f64;
                    horizon * s * s
                })
                .collect(),
            SnapshotPlan::Times { times } => {
                if times.iter().any(|&s| !(0.0..=horizon).contains(&s)) {
                    return Err(Error::invalid(
                        "times",
                        "snapshot times must lie in [0, horizon]",
                    ));
                }
                times.clone()
            }
        };
        t.sort_by(f64::total_cmp);
        t.dedup();
        Ok(Some(t))
    }
}
