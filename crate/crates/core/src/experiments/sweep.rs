use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use super::metric::{aggregate, l2_distance_series, Aggregate};
use super::GridSpec;
use crate::error::{Error, Result};
use crate::ode::{integrate_ode, Estimator, OdeConfig, OdeTrajectory};
use crate::output::{write_atomic, write_json};
use crate::process::{simulate, Clock, SimulationConfig, SnapshotPlan};
use crate::rng::RngStream;
use crate::rules::RuleConfig;
use crate::shapes::ShapeSpec;
use crate::sphere::io::fmt_f64;
use crate::sphere::Point;

/// `median(ε) ≤ coef · ε^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub coef: f64,
    pub exponent: f64,
}

impl Envelope {
    pub fn bound(&self, eps: f64) -> f64 {
        self.coef * eps.powf(self.exponent)
    }
}

/// Assertions checked after a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// Medians strictly decrease along the ε list.
    #[serde(default)]
    pub monotone: bool,
    #[serde(default)]
    pub envelope: Option<Envelope>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub rules: RuleConfig,
    #[serde(default)]
    pub r0: ShapeSpec,
    /// Defaults to the origin.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub epsilons: Vec<f64>,
    pub seeds: Vec<u64>,
    pub horizon: f64,
    pub grid: GridSpec,
    /// Equally spaced comparison times (count of intervals).
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    /// ODE step; must divide the comparison spacing into whole steps.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub clock: Clock,
    #[serde(default)]
    pub expect: Option<Expect>,
}

fn default_samples() -> usize {
    20
}

fn default_estimator() -> Estimator {
    Estimator::Stationary { nodes: 512 }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config(
                "epsilons must be non-empty and strictly decreasing".into(),
            ));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("epsilons must be positive".into()));
        }
        let mut s = self.seeds.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.seeds.len() || s.is_empty() {
            return Err(Error::Config("seeds must be non-empty and distinct".into()));
        }
        if !(self.horizon > 0.0) || self.samples == 0 {
            return Err(Error::Config("horizon and samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub seed: u64,
    pub sup_l2: f64,
    pub radius_triggered: bool,
    pub density_triggered: bool,
    pub clamps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsSummary {
    pub epsilon: f64,
    #[serde(flatten)]
    pub stats: Aggregate,
    pub triggered_runs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<f64>,
}

/// One-sided sign test that the metric decreases from `from` to `to`,
/// pairing runs by seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    pub from: f64,
    pub to: f64,
    pub decreases: usize,
    pub pairs: usize,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub per_epsilon: Vec<EpsSummary>,
    pub medians_decreasing: bool,
    pub sign_tests: Vec<SignTest>,
    pub within_envelope: Option<bool>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
    pub reference: OdeTrajectory,
}

/// For each ε and seed, runs the process and measures
/// `sup_t ‖R^ε_t − r_t‖₂` against one shared ODE solution on the same grid.
pub fn averaging_sweep(cfg: &SweepConfig) -> Result<SweepResults> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let rules = cfg.rules.build(grid.clone())?;
    let r0 = cfg.r0.build(grid.clone())?;
    let x0 = match &cfg.x0 {
        Some(c) => Point::from_slice(c)
            .ok_or_else(|| Error::Config("x0 must have 2 or 3 coordinates".into()))?,
        None => Point::origin(grid.dim()),
    };
    let plan = SnapshotPlan::Uniform { count: cfg.samples };
    let mut ode_cfg = OdeConfig::new(cfg.horizon, cfg.estimator).with_record(plan.clone());
    ode_cfg.dt = cfg.dt;
    let reference = integrate_ode(
        &r0,
        &rules,
        &ode_cfg,
        &mut RngStream::new(0).substream("ode", 0),
    )?;

    let jobs: Vec<(usize, u64)> = (0..cfg.epsilons.len())
        .flat_map(|i| cfg.seeds.iter().map(move |&s| (i, s)))
        .collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let eps = cfg.epsilons[i];
            let mut sim = SimulationConfig::new(eps, cfg.horizon).with_snapshots(plan.clone());
            sim.clock = cfg.clock;
            let mut rng = RngStream::new(seed).substream("epsilon", eps.to_bits());
            let tr = simulate(r0.clone(), x0, &rules, &sim, &mut rng)?;
            let series = l2_distance_series(&tr, &reference)?;
            Ok(SweepRow {
                epsilon: eps,
                seed,
                sup_l2: series.sup(),
                radius_triggered: tr.monitors.radius_triggered().is_some(),
                density_triggered: tr.monitors.density_triggered().is_some(),
                clamps: tr.final_state.clamps,
            })
        })
        .collect::<Result<_>>()?;

    let summary = summarize(cfg, &rows)?;
    Ok(SweepResults {
        rows,
        summary,
        reference,
    })
}

fn summarize(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<SweepSummary> {
    let envelope = cfg.expect.and_then(|e| e.envelope);
    let per_epsilon: Vec<EpsSummary> = cfg
        .epsilons
        .iter()
        .map(|&eps| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.epsilon == eps).collect();
            let values: Vec<f64> = mine.iter().map(|r| r.sup_l2).collect();
            EpsSummary {
                epsilon: eps,
                stats: aggregate(&values),
                triggered_runs: mine
                    .iter()
                    .filter(|r| r.radius_triggered || r.density_triggered)
                    .count(),
                envelope: envelope.map(|e| e.bound(eps)),
            }
        })
        .collect();
    let medians_decreasing = per_epsilon
        .windows(2)
        .all(|w| w[1].stats.median < w[0].stats.median);

    let mut sign_tests = Vec::new();
    for w in cfg.epsilons.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut decreases = 0;
        for &seed in &cfg.seeds {
            let find = |e: f64| {
                rows.iter()
                    .find(|r| r.epsilon == e && r.seed == seed)
                    .map(|r| r.sup_l2)
            };
            if let (Some(x), Some(y)) = (find(a), find(b)) {
                if y < x {
                    decreases += 1;
                }
            }
        }
        let pairs = cfg.seeds.len();
        let binom = Binomial::new(0.5, pairs as u64).map_err(|e| Error::Config(e.to_string()))?;
        let p_value = if decreases == 0 {
            1.0
        } else {
            1.0 - binom.cdf(decreases as u64 - 1)
        };
        sign_tests.push(SignTest {
            from: a,
            to: b,
            decreases,
            pairs,
            p_value,
        });
    }
    let within_envelope = envelope.map(|_| {
        per_epsilon
            .iter()
            .all(|s| s.stats.median <= s.envelope.unwrap_or(f64::INFINITY))
    });
    let passed = match cfg.expect {
        None => true,
        Some(e) => (!e.monotone || medians_decreasing) && within_envelope.unwrap_or(true),
    };
    Ok(SweepSummary {
        per_epsilon,
        medians_decreasing,
        sign_tests,
        within_envelope,
        passed,
    })
}

/// Writes `sweep_results.csv` and `sweep_summary.json`.
pub fn write_sweep(dir: &Path, results: &SweepResults) -> Result<()> {
    let mut s = String::from("epsilon,seed,sup_l2,radius_triggered,density_triggered,clamps\n");
    for r in &results.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            fmt_f64(r.epsilon),
            r.seed,
            fmt_f64(r.sup_l2),
            r.radius_triggered,
            r.density_triggered,
            r.clamps
        );
    }
    write_atomic(&dir.join("sweep_results.csv"), s.as_bytes())?;
    write_json(&dir.join("sweep_summary.json"), &results.summary)
}
