//! The averaged drift `b̄(r) = ∫ b(r, x) dν_r(x)` of the frozen-domain chain
//! and the deterministic shape dynamics `dr/dt = b̄(r)`.

mod output;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::SnapshotPlan;
use crate::rng::RngStream;
use crate::rules::{HittingRule, RuleSet, TransportRule};
use crate::sphere::{Point, RadialField};

pub use output::{write_ode, ODE_FILES};

/// Number of batches used for batch-means standard errors.
pub const BATCHES: usize = 32;

/// How `b̄` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Estimator {
    /// Exact expression; only for rule sets where `ν_r` is explicit.
    ClosedForm,
    /// Ergodic average along one simulated frozen chain.
    Chain { burn: usize, len: usize },
    /// Stationary law of the discretized chain of hit directions on a
    /// sub-grid of at most `nodes` directions, found by power iteration.
    Stationary {
        #[serde(default = "default_nodes")]
        nodes: usize,
    },
}

fn default_nodes() -> usize {
    512
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Chain {
            burn: 1000,
            len: 100_000,
        }
    }
}

impl Estimator {
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Estimator::Chain { .. })
    }
}

/// `b̄` with nodal standard errors when it was estimated by simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub bbar: RadialField,
    pub stderr: Option<RadialField>,
}

/// Embedded frozen chain `x_{i+1} = H(r, ξ_i)`, `ξ_i ~ F(r, x_i, ·)`.
/// Returns `x_{burn+1}, …, x_{burn+len}`.
pub fn frozen_chain_run(
    r: &RadialField,
    rules: &RuleSet,
    x0: Point,
    burn: usize,
    len: usize,
    rng: &mut RngStream,
) -> Result<Vec<Point>> {
    if len == 0 {
        return Err(Error::invalid("len", "must be at least 1"));
    }
    let view = rules.view(r)?;
    let mut x = x0;
    let mut out = Vec::with_capacity(len);
    for i in 0..burn + len {
        let xi = view.sample_angle(&x, rng)?;
        x = view.transport(&xi)?.point;
        if i >= burn {
            out.push(x);
        }
    }
    Ok(out)
}

/// Averaged drift for rule sets whose chain law is explicit: constant
/// transport (`ν_r` is a point mass at `H(r)`) or an `x`-independent `F`.
pub fn closed_form_bbar(r: &RadialField, rules: &RuleSet) -> Result<RadialField> {
    let view = rules.view(r)?;
    let x = match (&rules.transport, &rules.hitting) {
        (TransportRule::Origin, h) if h.is_exact() => Point::origin(r.dim()),
        (TransportRule::StatisticalCenter, h) if h.is_exact() => view.statistical_center(),
        (_, HittingRule::Uniform | HittingRule::BoundaryProportional) => Point::origin(r.dim()),
        _ => {
            return Err(Error::NoClosedForm(format!(
                "{} with {}",
                rules.hitting.name(),
                rules.transport.name()
            )))
        }
    };
    Ok(view.density(&x, &mut RngStream::new(0))?.drift())
}

fn chain_bbar(
    r: &RadialField,
    rules: &RuleSet,
    burn: usize,
    len: usize,
    rng: &mut RngStream,
) -> Result<DriftEstimate> {
    if len == 0 {
        return Err(Error::invalid("len", "must be at least 1"));
    }
    let view = rules.view(r)?;
    let m = r.len();
    let batch = (len / BATCHES).max(1);
    let mut batch_means: Vec<Vec<f64>> = Vec::new();
    let mut acc = vec![0.0; m];
    let mut in_batch = 0usize;
    let mut x = Point::origin(r.dim());
    for i in 0..burn + len {
        let d = view.density(&x, rng)?;
        if i >= burn {
            let omega_over_y = r.grid().area() / d.y;
            for (a, p) in acc.iter_mut().zip(d.field.values()) {
                *a += omega_over_y * p;
            }
            in_batch += 1;
            if in_batch == batch {
                batch_means.push(acc.iter().map(|a| a / batch as f64).collect());
                acc.iter_mut().for_each(|a| *a = 0.0);
                in_batch = 0;
            }
        }
        let xi = view.sample(&x, &d, rng)?;
        x = view.transport(&xi)?.point;
    }
    // leftover samples beyond the last full batch are dropped
    let nb = batch_means.len();
    let mut mean = vec![0.0; m];
    for b in &batch_means {
        for (s, v) in mean.iter_mut().zip(b) {
            *s += v / nb as f64;
        }
    }
    let stderr = if nb >= 2 {
        let mut var = vec![0.0; m];
        for b in &batch_means {
            for ((s, v), mu) in var.iter_mut().zip(b).zip(&mean) {
                *s += (v - mu).powi(2);
            }
        }
        let se = var
            .iter()
            .map(|v| (v / (nb as f64 - 1.0) / nb as f64).sqrt())
            .collect();
        Some(RadialField::new(r.grid().clone(), se)?)
    } else {
        None
    };
    Ok(DriftEstimate {
        bbar: RadialField::new(r.grid().clone(), mean)?,
        stderr,
    })
}

fn stationary_bbar(r: &RadialField, rules: &RuleSet, nodes: usize) -> Result<DriftEstimate> {
    if !rules.hitting.is_exact() {
        return Err(Error::Unsupported(
            "stationary estimator with a Monte Carlo density",
        ));
    }
    if nodes == 0 {
        return Err(Error::invalid("nodes", "must be positive"));
    }
    let view = rules.view(r)?;
    let grid = r.grid().clone();
    let m = grid.len();
    let k = nodes.min(m);
    let idx: Vec<usize> = (0..k).map(|a| a * m / k).collect();
    let starts: Vec<Point> = idx
        .iter()
        .map(|&j| view.transport(&grid.node(j)).map(|t| t.point))
        .collect::<Result<_>>()?;
    // Make sure lazily smoothed data exists before sharing the view across threads.
    let _ = view.smoothed();

    // Pass 1: transition rows on the sub-grid and y at each start.
    let rows: Vec<(Vec<f64>, f64)> = starts
        .par_iter()
        .map(|x| {
            let d = view.density(x, &mut RngStream::new(0))?;
            let row: Vec<f64> = idx.iter().map(|&j| d.field.values()[j]).collect();
            let s: f64 = row.iter().sum();
            Ok((row.into_iter().map(|v| v / s).collect(), d.y))
        })
        .collect::<Result<_>>()?;

    let mut mu = vec![1.0 / k as f64; k];
    let mut next = vec![0.0; k];
    for _ in 0..10_000 {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (a, (row, _)) in rows.iter().enumerate() {
            let w = mu[a];
            for (n, p) in next.iter_mut().zip(row) {
                *n += w * p;
            }
        }
        let s: f64 = next.iter().sum();
        let diff: f64 = next.iter().zip(&mu).map(|(a, b)| (a / s - b).abs()).sum();
        for (m, n) in mu.iter_mut().zip(&next) {
            *m = n / s;
        }
        if diff < 1e-15 {
            break;
        }
    }

    // Pass 2: b̄ = Σ_a μ_a ω F(r, x_a, ·) / y_a, in fixed chunks so the
    // floating-point sum does not depend on thread scheduling.
    let omega = grid.area();
    const CHUNK: usize = 16;
    let partials: Vec<Vec<f64>> = (0..k.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; m];
            for a in c * CHUNK..((c + 1) * CHUNK).min(k) {
                let d = view.density(&starts[a], &mut RngStream::new(0))?;
                let w = mu[a] * omega / rows[a].1;
                for (s, p) in acc.iter_mut().zip(d.field.values()) {
                    *s += w * p;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut bbar = vec![0.0; m];
    for p in &partials {
        for (s, v) in bbar.iter_mut().zip(p) {
            *s += v;
        }
    }
    Ok(DriftEstimate {
        bbar: RadialField::new(grid, bbar)?,
        stderr: None,
    })
}

/// `b̄(r)` with the requested estimator.
pub fn bbar(
    r: &RadialField,
    rules: &RuleSet,
    estimator: Estimator,
    rng: &mut RngStream,
) -> Result<DriftEstimate> {
    match estimator {
        Estimator::ClosedForm => Ok(DriftEstimate {
            bbar: closed_form_bbar(r, rules)?,
            stderr: None,
        }),
        Estimator::Chain { burn, len } => chain_bbar(r, rules, burn, len, rng),
        Estimator::Stationary { nodes } => stationary_bbar(r, rules, nodes),
    }
}

/// Largest L² distance between chain estimates of `b̄` started from
/// different points; a cheap check that the chain forgets its start.
pub fn multistart_dispersion(
    r: &RadialField,
    rules: &RuleSet,
    starts: &[Point],
    burn: usize,
    len: usize,
    rng: &RngStream,
) -> Result<f64> {
    let view = rules.view(r)?;
    let mut estimates = Vec::with_capacity(starts.len());
    for (i, x0) in starts.iter().enumerate() {
        let mut s = rng.substream("multistart", i as u64);
        let mut x = *x0;
        let mut acc = vec![0.0; r.len()];
        for step in 0..burn + len {
            let d = view.density(&x, &mut s)?;
            if step >= burn {
                for (a, b) in acc.iter_mut().zip(d.drift().values()) {
                    *a += b / len as f64;
                }
            }
            let xi = view.sample(&x, &d, &mut s)?;
            x = view.transport(&xi)?.point;
        }
        estimates.push(RadialField::new(r.grid().clone(), acc)?);
    }
    let mut worst: f64 = 0.0;
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let diff = estimates[i].zip_map(&estimates[j], |a, b| a - b)?;
            worst = worst.max(diff.lp_norm(2.0)?);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    Euler,
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeConfig {
    pub horizon: f64,
    /// Step size; defaults to `1e-3 (1 + Leb(r0))`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Defaults to RK4 for deterministic estimators and Euler otherwise.
    #[serde(default)]
    pub integrator: Option<Integrator>,
    #[serde(default)]
    pub estimator: Estimator,
    /// Recorded times; steps are adjusted so each one is hit exactly.
    #[serde(default = "default_record")]
    pub record: SnapshotPlan,
}

fn default_record() -> SnapshotPlan {
    SnapshotPlan::Uniform { count: 20 }
}

impl OdeConfig {
    pub fn new(horizon: f64, estimator: Estimator) -> Self {
        Self {
            horizon,
            dt: None,
            integrator: None,
            estimator,
            record: default_record(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_record(mut self, plan: SnapshotPlan) -> Self {
        self.record = plan;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = Some(integrator);
        self
    }
}

/// Recorded states of an ODE solution, with the drift estimate taken at
/// each recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<RadialField>,
    pub drift: Vec<DriftEstimate>,
}

impl OdeTrajectory {
    /// State held at time `t` (the last recorded at or before `t`).
    pub fn at(&self, t: f64) -> Option<&RadialField> {
        let k = self
            .times
            .partition_point(|&s| s <= t + 1e-12 * t.abs().max(1.0));
        k.checked_sub(1).map(|k| &self.states[k])
    }

    /// `max_k |Leb(r_{t_k}) − Leb(r_0) − t_k|`.
    pub fn volume_law_error(&self) -> Result<f64> {
        let leb0 = self.states[0].leb_volume()?;
        let mut worst: f64 = 0.0;
        for (t, s) in self.times.iter().zip(&self.states) {
            worst = worst.max((s.leb_volume()? - leb0 - t).abs());
        }
        Ok(worst)
    }
}

fn axpy(r: &RadialField, h: f64, b: &RadialField) -> RadialField {
    let mut out = r.clone();
    for (o, v) in out.values_mut().iter_mut().zip(b.values()) {
        *o += h * v;
    }
    out
}

fn check_positive(r: &RadialField) -> Result<()> {
    match r.values().iter().position(|&v| !(v > 0.0)) {
        Some(index) => Err(Error::NonPositiveState {
            index,
            value: r.values()[index],
        }),
        None => Ok(()),
    }
}

/// Integrates `dr/dt = b̄(r)` from `r0` over `[0, horizon]`.
pub fn integrate_ode(
    r0: &RadialField,
    rules: &RuleSet,
    cfg: &OdeConfig,
    rng: &mut RngStream,
) -> Result<OdeTrajectory> {
    r0.ensure_positive()?;
    let leb0 = r0.leb_volume()?;
    let dt = cfg.dt.unwrap_or(1e-3 * (1.0 + leb0));
    if !(dt > 0.0) || dt > 0.05 * leb0 {
        return Err(Error::invalid(
            "dt",
            format!("must lie in (0, 0.05 Leb(r0)] = (0, {}]", 0.05 * leb0),
        ));
    }
    let record = cfg
        .record
        .times(cfg.horizon)?
        .ok_or_else(|| Error::invalid("record", "ODE output needs explicit times"))?;
    let integrator = cfg
        .integrator
        .unwrap_or(if cfg.estimator.is_deterministic() {
            Integrator::Rk4
        } else {
            Integrator::Euler
        });
    let mut f = |r: &RadialField| bbar(r, rules, cfg.estimator, rng);

    let mut r = r0.clone();
    let mut t = 0.0;
    let mut times = Vec::with_capacity(record.len());
    let mut states = Vec::with_capacity(record.len());
    let mut drift = Vec::with_capacity(record.len());
    // estimate of b̄ at the current state, reused as the first stage of the next step
    let mut current: Option<DriftEstimate> = None;
    for &target in &record {
        let span = target - t;
        let steps = if span > 0.0 {
            (span / dt).ceil() as usize
        } else {
            0
        };
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        for _ in 0..steps {
            let k1 = match current.take() {
                Some(e) => e.bbar,
                None => f(&r)?.bbar,
            };
            r = match integrator {
                Integrator::Euler => axpy(&r, h, &k1),
                Integrator::Rk4 => {
                    let k2 = f(&axpy(&r, 0.5 * h, &k1))?.bbar;
                    let k3 = f(&axpy(&r, 0.5 * h, &k2))?.bbar;
                    let k4 = f(&axpy(&r, h, &k3))?.bbar;
                    let mut next = r.clone();
                    for (j, v) in next.values_mut().iter_mut().enumerate() {
                        *v += h / 6.0
                            * (k1.values()[j]
                                + 2.0 * k2.values()[j]
                                + 2.0 * k3.values()[j]
                                + k4.values()[j]);
                    }
                    next
                }
            };
            check_positive(&r)?;
        }
        t = target;
        let est = match current.take() {
            Some(e) => e,
            None => f(&r)?,
        };
        times.push(t);
        states.push(r.clone());
        drift.push(est.clone());
        current = Some(est);
    }
    Ok(OdeTrajectory {
        times,
        states,
        drift,
    })
}

/// `‖b̄(ψ) − ψ / (n Leb(ψ))‖₂`, which vanishes exactly for invariant shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub value: f64,
    /// `sqrt(Σ_j se_j² w_j)` when `b̄` was estimated by simulation.
    pub stderr: Option<f64>,
}

pub fn invariant_residual(
    psi: &RadialField,
    rules: &RuleSet,
    estimator: Estimator,
    rng: &mut RngStream,
) -> Result<Residual> {
    psi.ensure_positive()?;
    let est = bbar(psi, rules, estimator, rng)?;
    let n = psi.dim() as f64;
    let leb = psi.leb_volume()?;
    let diff = est.bbar.zip_map(psi, |b, p| b - p / (n * leb))?;
    let stderr = est
        .stderr
        .as_ref()
        .map(|se| se.map(|v| v * v).integral().sqrt());
    Ok(Residual {
        value: diff.lp_norm(2.0)?,
        stderr,
    })
}

/// `r / (leb0 + t)^{1/n}`.
pub fn normalized_profile(r: &RadialField, t: f64, leb0: f64) -> Result<RadialField> {
    if !(leb0 > 0.0) || !(leb0 + t > 0.0) {
        return Err(Error::invalid("leb0", "must be positive"));
    }
    Ok(r.scaled((leb0 + t).powf(-1.0 / r.dim() as f64)))
}

#[cfg(test)]
mod tests;
