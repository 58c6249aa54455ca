use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GridSpec;
use crate::error::{Error, Result};
use crate::output::{write_atomic, write_json};
use crate::process::{simulate, Clock, SimulationConfig, SnapshotPlan, Trajectory};
use crate::rng::RngStream;
use crate::rules::{RuleConfig, RuleSet};
use crate::shapes::ShapeSpec;
use crate::sphere::io::fmt_f64;
use crate::sphere::{Point, RadialField};

/// Runs the scale-1 process from `(cN)^{1/n} ψ` for each `N` in a ladder and
/// compares the renormalized domain `(N(c+s))^{-1/n} R_{sN}` with `ψ`,
/// where `ψ` is `shape` rescaled to unit volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleConfig {
    pub rules: RuleConfig,
    pub shape: ShapeSpec,
    pub ladder: Vec<f64>,
    #[serde(default = "one")]
    pub c: f64,
    /// Final value of `s`; the metric is the sup over `s ∈ [1, s_max]`.
    #[serde(default = "two")]
    pub s_max: f64,
    /// Number of equal steps in `s` between 1 and `s_max`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seeds: Vec<u64>,
    pub grid: GridSpec,
    #[serde(default)]
    pub clock: Clock,
    /// Run the equivalent `ε = 1/N` process from `c^{1/n} ψ` instead.
    #[serde(default)]
    pub coupled: bool,
    /// Fail unless the median metric decreases along the ladder.
    #[serde(default)]
    pub expect_decreasing: bool,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

fn default_samples() -> usize {
    10
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleRow {
    pub n_scale: f64,
    pub seed: u64,
    pub sup_l2: f64,
    pub jumps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaleResults {
    pub rows: Vec<RescaleRow>,
    /// Median over seeds, one entry per ladder value.
    pub medians: Vec<f64>,
    pub decreasing: bool,
    pub passed: bool,
}

/// The shape `ψ` of unit volume used by a config.
pub fn target_shape(cfg: &RescaleConfig) -> Result<RadialField> {
    cfg.shape.build_with_volume(cfg.grid.build()?, 1.0)
}

pub fn shape_rescale_experiment(cfg: &RescaleConfig) -> Result<RescaleResults> {
    if cfg.ladder.is_empty() || cfg.ladder.iter().any(|n| !(*n > 0.0)) {
        return Err(Error::Config("ladder values must be positive".into()));
    }
    if !(cfg.c > 0.0) || !(cfg.s_max > 1.0) || cfg.samples == 0 || cfg.seeds.is_empty() {
        return Err(Error::Config(
            "need c > 0, s_max > 1, samples > 0 and at least one seed".into(),
        ));
    }
    let grid = cfg.grid.build()?;
    let rules = cfg.rules.build(grid.clone())?;
    if !rules.is_scale_invariant() {
        return Err(Error::NotScaleInvariant(format!(
            "{}+{}",
            rules.hitting.name(),
            rules.transport.name()
        )));
    }
    let psi = cfg.shape.build_with_volume(grid, 1.0)?;
    let jobs: Vec<(f64, u64)> = cfg
        .ladder
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let rows: Vec<RescaleRow> = jobs
        .par_iter()
        .map(|&(n_scale, seed)| rescaled_run(cfg, &rules, &psi, n_scale, seed))
        .collect::<Result<_>>()?;
    let medians: Vec<f64> = cfg
        .ladder
        .iter()
        .map(|&n| {
            let v: Vec<f64> = rows
                .iter()
                .filter(|r| r.n_scale == n)
                .map(|r| r.sup_l2)
                .collect();
            super::aggregate(&v).median
        })
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    Ok(RescaleResults {
        rows,
        medians,
        decreasing,
        passed: decreasing || !cfg.expect_decreasing,
    })
}

/// One run of the experiment, returning the trajectory in the scale it was
/// simulated in.
pub fn rescaled_trajectory(
    cfg: &RescaleConfig,
    rules: &RuleSet,
    psi: &RadialField,
    n_scale: f64,
    seed: u64,
) -> Result<Trajectory> {
    let dim = psi.dim() as f64;
    let s_times: Vec<f64> = (0..=cfg.samples)
        .map(|k| 1.0 + (cfg.s_max - 1.0) * k as f64 / cfg.samples as f64)
        .collect();
    let (eps, r0, times) = if cfg.coupled {
        (1.0 / n_scale, psi.scaled(cfg.c.powf(1.0 / dim)), s_times)
    } else {
        (
            1.0,
            psi.scaled((cfg.c * n_scale).powf(1.0 / dim)),
            s_times.iter().map(|s| s * n_scale).collect(),
        )
    };
    let horizon = *times.last().unwrap_or(&1.0);
    let sim = SimulationConfig::new(eps, horizon)
        .with_snapshots(SnapshotPlan::Times { times })
        .with_clock(cfg.clock);
    let mut rng = RngStream::new(seed).substream("rescale", n_scale.to_bits());
    simulate(r0, Point::origin(psi.dim()), rules, &sim, &mut rng)
}

fn rescaled_run(
    cfg: &RescaleConfig,
    rules: &RuleSet,
    psi: &RadialField,
    n_scale: f64,
    seed: u64,
) -> Result<RescaleRow> {
    let tr = rescaled_trajectory(cfg, rules, psi, n_scale, seed)?;
    Ok(RescaleRow {
        n_scale,
        seed,
        sup_l2: rescale_metric(&tr, psi, cfg.c, n_scale)?,
        jumps: tr.final_state.jumps,
    })
}

/// `sup_s ‖(N(c+s))^{-1/n} R^1_{sN} − ψ‖₂` over the snapshots after time 0.
///
/// Works for the scale-1 run and for the equivalent `ε = 1/N` run alike:
/// with `k = N ε`, a snapshot at time `t` sits at `s = t / k` and the
/// domain is normalized by the volume `k (c + s)`.
pub fn rescale_metric(tr: &Trajectory, psi: &RadialField, c: f64, n_scale: f64) -> Result<f64> {
    let dim = psi.dim() as f64;
    let k = n_scale * tr.eps;
    let mut sup: f64 = 0.0;
    for snap in tr.snapshots.iter().filter(|s| s.t > 0.0) {
        let s = snap.t / k;
        let normalized = snap.r.scaled((k * (c + s)).powf(-1.0 / dim));
        sup = sup.max(normalized.zip_map(psi, |a, b| a - b)?.lp_norm(2.0)?);
    }
    Ok(sup)
}

/// Writes `rescale_results.csv` and `rescale_summary.json`.
pub fn write_rescale(dir: &Path, results: &RescaleResults) -> Result<()> {
    let mut s = String::from("n_scale,seed,sup_l2,jumps\n");
    for r in &results.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_f64(r.n_scale),
            r.seed,
            fmt_f64(r.sup_l2),
            r.jumps
        );
    }
    write_atomic(&dir.join("rescale_results.csv"), s.as_bytes())?;
    write_json(
        &dir.join("rescale_summary.json"),
        &serde_json::json!({
            "medians": results.medians,
            "decreasing": results.decreasing,
            "passed": results.passed,
        }),
    )
}
