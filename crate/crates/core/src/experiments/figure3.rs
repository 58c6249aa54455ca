use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GridSpec, MetricSeries};
use crate::error::{Error, Result};
use crate::ode::normalized_profile;
use crate::output::write_atomic;
use crate::process::{
    simulate, write_trajectory, Clock, SimulationConfig, SnapshotPlan, Trajectory,
};
use crate::rng::RngStream;
use crate::rules::RuleConfig;
use crate::shapes::ShapeSpec;
use crate::sphere::io::fmt_f64;
use crate::sphere::{Point, RadialField};

/// A long planar growth run recorded at quadratically spaced times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Figure3Config {
    pub rules: RuleConfig,
    #[serde(default = "ShapeSpec::sunflower")]
    pub r0: ShapeSpec,
    pub eps: f64,
    pub horizon: f64,
    pub grid: GridSpec,
    pub seed: u64,
    #[serde(default = "default_plan")]
    pub snapshots: SnapshotPlan,
    #[serde(default)]
    pub clock: Clock,
}

fn default_plan() -> SnapshotPlan {
    SnapshotPlan::Quadratic { count: 16 }
}

#[derive(Debug, Clone)]
pub struct Figure3Result {
    pub trajectory: Trajectory,
    /// `max_θ r_t` at every snapshot.
    pub diameter: MetricSeries,
    /// Oscillation of the volume-normalized profile at every snapshot.
    pub oscillation: MetricSeries,
    /// Mean normalized radius along the axes divided by the mean along the
    /// diagonals, at every snapshot. Above one for diamond-like domains,
    /// below one for square-like ones.
    pub axis_diagonal_ratio: MetricSeries,
}

impl Figure3Result {
    /// `diameter(t)/√t` divided by its value at the latest snapshot not after `t_ref`.
    pub fn sqrt_growth_ratios(&self, t_ref: f64) -> Result<Vec<(f64, f64)>> {
        let d = &self.diameter;
        let k = d
            .times
            .iter()
            .rposition(|&t| t <= t_ref && t > 0.0)
            .ok_or_else(|| {
                Error::invalid(
                    "t_ref",
                    "no positive snapshot at or before the reference time",
                )
            })?;
        let base = d.values[k] / d.times[k].sqrt();
        Ok(d.times
            .iter()
            .zip(&d.values)
            .filter(|(t, _)| **t >= d.times[k])
            .map(|(t, v)| (*t, v / t.sqrt() / base))
            .collect())
    }
}

pub fn axis_diagonal_ratio(r: &RadialField) -> f64 {
    let mean = |offset: f64| {
        (0..4)
            .map(|k| r.interpolate(&Point::from_angle(offset + k as f64 * 2.0 * FRAC_PI_4)))
            .sum::<f64>()
            / 4.0
    };
    mean(0.0) / mean(FRAC_PI_4)
}

pub fn figure3_run(cfg: &Figure3Config) -> Result<Figure3Result> {
    if cfg.grid.n != 2 {
        return Err(Error::UnsupportedDimension(cfg.grid.n));
    }
    let grid = cfg.grid.build()?;
    let rules = cfg.rules.build(grid.clone())?;
    let r0 = cfg.r0.build(grid)?;
    let leb0 = r0.leb_volume()?;
    let sim = SimulationConfig::new(cfg.eps, cfg.horizon)
        .with_snapshots(cfg.snapshots.clone())
        .with_clock(cfg.clock);
    let mut rng = RngStream::new(cfg.seed).substream("figure3", 0);
    let trajectory = simulate(r0, Point::origin(2), &rules, &sim, &mut rng)?;

    let times: Vec<f64> = trajectory.snapshots.iter().map(|s| s.t).collect();
    let mut diam = Vec::with_capacity(times.len());
    let mut osc = Vec::with_capacity(times.len());
    let mut ratio = Vec::with_capacity(times.len());
    for s in &trajectory.snapshots {
        diam.push(s.r.max());
        let p = normalized_profile(&s.r, s.t, leb0)?;
        osc.push(p.oscillation());
        ratio.push(axis_diagonal_ratio(&p));
    }
    Ok(Figure3Result {
        diameter: MetricSeries::from_values(times.clone(), diam)?,
        oscillation: MetricSeries::from_values(times.clone(), osc)?,
        axis_diagonal_ratio: MetricSeries::from_values(times, ratio)?,
        trajectory,
    })
}

/// Writes the trajectory files plus `shape_series.csv`
/// (t, diameter, oscillation, axis_diagonal_ratio).
pub fn write_figure3<M: Serialize>(dir: &Path, res: &Figure3Result, meta: &M) -> Result<()> {
    write_trajectory(dir, &res.trajectory, meta)?;
    let mut s = String::from("t,diameter,oscillation,axis_diagonal_ratio\n");
    for k in 0..res.diameter.times.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(res.diameter.times[k]),
            fmt_f64(res.diameter.values[k]),
            fmt_f64(res.oscillation.values[k]),
            fmt_f64(res.axis_diagonal_ratio.values[k])
        );
    }
    write_atomic(&dir.join("shape_series.csv"), s.as_bytes())
}
