use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::OdeTrajectory;
use crate::process::Trajectory;

/// A metric sampled at the snapshot times of a run, with its running sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub running_sup: Vec<f64>,
}

impl MetricSeries {
    pub fn from_values(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::invalid("values", "one value per time is required"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "metric values must be finite"));
        }
        let mut sup = f64::NEG_INFINITY;
        let running_sup = values
            .iter()
            .map(|&v| {
                sup = sup.max(v);
                sup
            })
            .collect();
        Ok(Self {
            times,
            values,
            running_sup,
        })
    }

    pub fn sup(&self) -> f64 {
        self.running_sup.last().copied().unwrap_or(0.0)
    }
}

/// `‖R_t − r_t‖₂` at every snapshot of `a`, holding the ODE state at the
/// last recorded time not after `t`.
pub fn l2_distance_series(a: &Trajectory, b: &OdeTrajectory) -> Result<MetricSeries> {
    let mut times = Vec::with_capacity(a.snapshots.len());
    let mut values = Vec::with_capacity(a.snapshots.len());
    for s in &a.snapshots {
        let reference = b
            .at(s.t)
            .ok_or_else(|| Error::invalid("ode", format!("no ODE state at or before t={}", s.t)))?;
        let diff = s.r.zip_map(reference, |x, y| x - y)?;
        times.push(s.t);
        values.push(diff.lp_norm(2.0)?);
    }
    MetricSeries::from_values(times, values)
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub count: usize,
}

pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn aggregate(values: &[f64]) -> Aggregate {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Aggregate {
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
        count: v.len(),
    }
}
