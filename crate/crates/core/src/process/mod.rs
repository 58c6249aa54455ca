//! The growth process: a particle inside a star-shaped domain jumps to the
//! boundary at Poisson times of rate `1/ε`, deposits a bump of volume `≈ ε`
//! there, and is transported back inside.

mod monitors;
mod output;
mod plan;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::rules::{bump_scale, Density, HittingRule, RuleSet};
use crate::sphere::{BumpKernel, Point, RadialField};

pub use monitors::{check_monitors, Monitors};
pub use output::{write_trajectory, TRAJECTORY_FILES};
pub use plan::SnapshotPlan;

/// Current domain, particle position and run counters.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthState {
    pub r: RadialField,
    pub x: Point,
    pub t: f64,
    pub jumps: u64,
    /// Transports pulled back inside the smoothed domain.
    pub clamps: u64,
    /// Transports that landed outside the smoothed domain (not clamped).
    pub outside: u64,
    /// Jumps that used an under-sampled Monte Carlo density.
    pub undersampled: u64,
}

impl GrowthState {
    pub fn new(r: RadialField, x: Point) -> Result<Self> {
        r.ensure_positive()?;
        if x.dim() != r.dim() {
            return Err(Error::invalid("x0", "dimension differs from the grid"));
        }
        Ok(Self {
            r,
            x,
            t: 0.0,
            jumps: 0,
            clamps: 0,
            outside: 0,
            undersampled: 0,
        })
    }
}

/// Holding times between jumps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clock {
    /// Exponential with mean `ε` (the Poisson clock).
    #[default]
    Exponential,
    /// Deterministic `ε`; a variance-reduction device, not the model.
    Fixed,
}

/// One jump as it was applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord {
    pub t: f64,
    pub xi: Point,
    pub eta: f64,
    pub y: f64,
    pub dleb: f64,
}

/// Domain and particle held at a recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub r: RadialField,
    pub x: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub eps: f64,
    pub horizon: f64,
    pub snapshots: Vec<Snapshot>,
    /// Particle position at time 0 and after every jump.
    pub particle: Vec<(f64, Point)>,
    pub jumps: Vec<JumpRecord>,
    pub monitors: Monitors,
    pub final_state: GrowthState,
}

impl Trajectory {
    /// Snapshot held at time `t` (the last one recorded at or before `t`).
    pub fn at(&self, t: f64) -> Option<&Snapshot> {
        let k = self.snapshots.partition_point(|s| s.t <= t);
        k.checked_sub(1).map(|k| &self.snapshots[k])
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }
}

/// Settings of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub eps: f64,
    pub horizon: f64,
    #[serde(default)]
    pub clock: Clock,
    #[serde(default)]
    pub snapshots: SnapshotPlan,
    #[serde(default = "default_delta")]
    pub delta_density: f64,
    #[serde(default = "default_delta")]
    pub delta_radius: f64,
    /// Abort with an error as soon as a monitor triggers.
    #[serde(default)]
    pub strict: bool,
}

fn default_delta() -> f64 {
    1e-6
}

impl SimulationConfig {
    pub fn new(eps: f64, horizon: f64) -> Self {
        Self {
            eps,
            horizon,
            clock: Clock::default(),
            snapshots: SnapshotPlan::default(),
            delta_density: default_delta(),
            delta_radius: default_delta(),
            strict: false,
        }
    }

    pub fn with_snapshots(mut self, plan: SnapshotPlan) -> Self {
        self.snapshots = plan;
        self
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) || !self.eps.is_finite() {
            return Err(Error::invalid("eps", "must be finite and positive"));
        }
        if !(self.delta_density >= 0.0) || !(self.delta_radius > 0.0) {
            return Err(Error::invalid(
                "delta",
                "monitor thresholds must be positive",
            ));
        }
        Ok(())
    }
}

/// Steps the process while caching Monte Carlo densities across jumps
/// when the hitting rule asks for a refresh interval above one.
pub struct Stepper<'a> {
    rules: &'a RuleSet,
    eps: f64,
    clock: Clock,
    cached: Option<(Density, usize)>,
}

impl<'a> Stepper<'a> {
    pub fn new(rules: &'a RuleSet, eps: f64, clock: Clock) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::invalid("eps", "must be finite and positive"));
        }
        Ok(Self {
            rules,
            eps,
            clock,
            cached: None,
        })
    }

    /// Draws the next holding time. Always the first draw of a jump.
    pub fn holding_time(&self, rng: &mut RngStream) -> f64 {
        match self.clock {
            Clock::Exponential => self.eps * rng.exp1(),
            Clock::Fixed => self.eps,
        }
    }

    fn density(&mut self, state: &GrowthState, rng: &mut RngStream) -> Result<Density> {
        let refresh = match self.rules.hitting {
            HittingRule::HarmonicMc { refresh, .. } => refresh,
            _ => 1,
        };
        if refresh > 1 {
            if let Some((d, age)) = &mut self.cached {
                if *age < refresh {
                    *age += 1;
                    return Ok(d.clone());
                }
            }
        }
        let d = self.rules.view(&state.r)?.density(&state.x, rng)?;
        if refresh > 1 {
            self.cached = Some((d.clone(), 1));
        }
        Ok(d)
    }

    /// Applies the jump at time `t_jump`: samples `ξ`, transports the
    /// particle using the pre-jump domain, and deposits the bump.
    /// Returns the record and the density used.
    pub fn jump(
        &mut self,
        state: &mut GrowthState,
        t_jump: f64,
        rng: &mut RngStream,
    ) -> Result<(JumpRecord, Density)> {
        self.jump_with(state, t_jump, None, rng)
    }

    /// Like [`Stepper::jump`], but deposits at the prescribed `xi` when one
    /// is given instead of sampling it. The density is still evaluated,
    /// since it fixes `y` and hence the bump width and amplitude.
    pub fn jump_with(
        &mut self,
        state: &mut GrowthState,
        t_jump: f64,
        xi: Option<Point>,
        rng: &mut RngStream,
    ) -> Result<(JumpRecord, Density)> {
        let density = self.density(state, rng)?;
        let (xi, moved) = {
            let view = self.rules.view(&state.r)?;
            let xi = match xi {
                Some(xi) => xi,
                None => view.sample(&state.x, &density, rng)?,
            };
            (xi, view.transport(&xi)?)
        };
        let grid = state.r.grid().clone();
        let eta = bump_scale(self.eps, density.y, &grid)?;
        let kernel = BumpKernel::new(eta, grid, self.rules.smoother().profile().clone())?;
        let dleb = kernel.deposit(&mut state.r, &xi, self.eps / density.y)?;
        state.x = moved.point;
        state.t = t_jump;
        state.jumps += 1;
        state.clamps += u64::from(moved.clamped);
        state.outside += u64::from(moved.outside);
        state.undersampled += u64::from(density.undersampled);
        Ok((
            JumpRecord {
                t: t_jump,
                xi,
                eta,
                y: density.y,
                dleb,
            },
            density,
        ))
    }
}

/// One jump with a freshly drawn holding time.
pub fn step(
    state: &mut GrowthState,
    rules: &RuleSet,
    eps: f64,
    rng: &mut RngStream,
) -> Result<JumpRecord> {
    let mut stepper = Stepper::new(rules, eps, Clock::Exponential)?;
    let dt = stepper.holding_time(rng);
    let t = state.t + dt;
    stepper.jump(state, t, rng).map(|(rec, _)| rec)
}

/// Runs the process on `[0, horizon]`.
///
/// Holding times come from the `"clock"` substream of `rng` and jump `k`
/// draws from the `("jump", k)` substream, so the randomness used inside
/// one jump never shifts the draws of later jumps.
pub fn simulate(
    r0: RadialField,
    x0: Point,
    rules: &RuleSet,
    cfg: &SimulationConfig,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    run(r0, x0, rules, cfg, rng, None)
}

/// Runs the scale-1 partner of an `ε` run.
///
/// The partner starts from `(ε^{-1/n} r_0, ε^{-1/n} x_0)`, jumps at the
/// times `t_i / ε` and deposits at the same angles `ξ_i` as `small`, and
/// draws any Monte Carlo densities from the same per-jump substreams of
/// `rng`. Mapping the result through [`rescale_trajectory`] with
/// `c = ε^{1/n}` gives a trajectory that coincides with `small` whenever
/// the rule set is scale invariant.
pub fn coupled_unit_run(
    small: &Trajectory,
    r0: RadialField,
    x0: Point,
    rules: &RuleSet,
    cfg: &SimulationConfig,
    rng: &mut RngStream,
) -> Result<Trajectory> {
    cfg.validate()?;
    if (small.eps - cfg.eps).abs() > 1e-15 * cfg.eps || small.horizon != cfg.horizon {
        return Err(Error::invalid("cfg", "must match the run being coupled"));
    }
    let n = r0.dim() as f64;
    let c = cfg.eps.powf(1.0 / n);
    let eps = cfg.eps;
    let unit_cfg = SimulationConfig {
        eps: 1.0,
        horizon: cfg.horizon / eps,
        snapshots: match &cfg.snapshots {
            SnapshotPlan::Times { times } => SnapshotPlan::Times {
                times: times.iter().map(|t| t / eps).collect(),
            },
            plan => plan.clone(),
        },
        clock: cfg.clock,
        delta_density: cfg.delta_density,
        delta_radius: cfg.delta_radius,
        strict: cfg.strict,
    };
    let drive: Vec<(f64, Point)> = small.jumps.iter().map(|j| (j.t / eps, j.xi)).collect();
    run(
        r0.scaled(1.0 / c),
        x0 * (1.0 / c),
        rules,
        &unit_cfg,
        rng,
        Some(&drive),
    )
}

fn run(
    r0: RadialField,
    x0: Point,
    rules: &RuleSet,
    cfg: &SimulationConfig,
    rng: &mut RngStream,
    drive: Option<&[(f64, Point)]>,
) -> Result<Trajectory> {
    cfg.validate()?;
    let plan = cfg.snapshots.times(cfg.horizon)?;
    let mut state = GrowthState::new(r0, x0)?;
    rules.grid().ensure_same(state.r.grid())?;
    let mut stepper = Stepper::new(rules, cfg.eps, cfg.clock)?;
    let mut monitors = Monitors::new(cfg.delta_density, cfg.delta_radius)?;
    let mut snapshots = Vec::new();
    let mut particle = vec![(0.0, state.x)];
    let mut jumps = Vec::new();
    let mut next_snap = 0usize;
    let every_jump = plan.is_none();
    let plan = plan.unwrap_or_default();

    monitors.observe_radius(&state);
    if every_jump {
        snapshots.push(snapshot(&state, 0.0));
    }
    let mut clock_rng = rng.substream("clock", 0);
    loop {
        let k = jumps.len();
        let (t_next, xi) = match drive {
            Some(d) => d
                .get(k)
                .map_or((f64::INFINITY, None), |&(t, xi)| (t, Some(xi))),
            None => (state.t + stepper.holding_time(&mut clock_rng), None),
        };
        let until = t_next.min(cfg.horizon);
        while next_snap < plan.len() && plan[next_snap] < until {
            snapshots.push(snapshot(&state, plan[next_snap]));
            next_snap += 1;
        }
        if t_next > cfg.horizon {
            break;
        }
        let mut jump_rng = rng.substream("jump", k as u64);
        let (rec, density) = stepper.jump_with(&mut state, t_next, xi, &mut jump_rng)?;
        if rules.hitting.is_exact() {
            monitors.observe_density(density.field.min(), rec.t);
        }
        monitors.observe_radius(&state);
        if cfg.strict {
            monitors.ensure_quiet()?;
        }
        particle.push((rec.t, state.x));
        jumps.push(rec);
        if every_jump {
            snapshots.push(snapshot(&state, rec.t));
        }
    }
    while next_snap < plan.len() {
        snapshots.push(snapshot(&state, plan[next_snap]));
        next_snap += 1;
    }
    if every_jump && snapshots.last().map(|s| s.t) != Some(cfg.horizon) {
        snapshots.push(snapshot(&state, cfg.horizon));
    }
    if cfg.strict {
        monitors.ensure_quiet()?;
    }
    Ok(Trajectory {
        eps: cfg.eps,
        horizon: cfg.horizon,
        snapshots,
        particle,
        jumps,
        monitors,
        final_state: state,
    })
}

fn snapshot(state: &GrowthState, t: f64) -> Snapshot {
    Snapshot {
        t,
        r: state.r.clone(),
        x: state.x,
    }
}

/// Maps a run to its image under `(r, x, t) ↦ (c r, c x, c^n t)`.
///
/// With `c = ε^{1/n}` this turns a scale-1 run into the coupled `ε` run.
pub fn rescale_trajectory(traj: &Trajectory, c: f64) -> Result<Trajectory> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("c", "must be finite and positive"));
    }
    let n = traj.final_state.r.dim() as i32;
    let cn = c.powi(n);
    let cy = c.powi(n - 1);
    let state = |s: &GrowthState| GrowthState {
        r: s.r.scaled(c),
        x: s.x * c,
        t: s.t * cn,
        ..s.clone()
    };
    Ok(Trajectory {
        eps: traj.eps * cn,
        horizon: traj.horizon * cn,
        snapshots: traj
            .snapshots
            .iter()
            .map(|s| Snapshot {
                t: s.t * cn,
                r: s.r.scaled(c),
                x: s.x * c,
            })
            .collect(),
        particle: traj
            .particle
            .iter()
            .map(|(t, x)| (t * cn, *x * c))
            .collect(),
        jumps: traj
            .jumps
            .iter()
            .map(|j| JumpRecord {
                t: j.t * cn,
                xi: j.xi,
                eta: j.eta,
                y: j.y * cy,
                dleb: j.dleb * cn,
            })
            .collect(),
        monitors: traj.monitors.rescaled(cn),
        final_state: state(&traj.final_state),
    })
}

#[cfg(test)]
mod tests;
