//! Command-line front end.
//!
//! Every subcommand reads a strict JSON config (unknown keys are rejected),
//! applies flag overrides, runs, and writes its artifacts plus a `meta.json`
//! that records the build and the effective config. Passing that `meta.json`
//! back as `--config` replays the run.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    averaging_sweep, shape_rescale_experiment, write_rescale, write_sweep, GridSpec, RescaleConfig,
    SweepConfig,
};
use crate::lattice::{
    run_lattice, write_lattice, Excitation, LatticeConfig, WalkRule, DEFAULT_HALF_WIDTH,
};
use crate::ode::{integrate_ode, invariant_residual, write_ode, Estimator, Integrator, OdeConfig};
use crate::output::write_json;
use crate::process::{simulate, write_trajectory, Clock, SimulationConfig, SnapshotPlan};
use crate::rng::RngStream;
use crate::rules::RuleConfig;
use crate::shapes::ShapeSpec;
use crate::sphere::Point;
use crate::validation::{harmonic_mc_vs_exact, kernel_normalization, wos_disk_ks};

/// Build identifier printed by `--version` and stored in every `meta.json`.
pub const BUILD_ID: &str = concat!("stargrowth ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "stargrowth", version = env!("CARGO_PKG_VERSION"), about = "Random growth of star-shaped domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the jump process and write the trajectory files.
    Simulate(SimulateArgs),
    /// Integrate the averaged ODE.
    Ode(OdeArgs),
    /// Evaluate the invariant-shape residual of a rule set at a shape.
    InvariantCheck(InvariantArgs),
    /// Compare the process with the averaged ODE across an ε list.
    Sweep(SweepArgs),
    /// Renormalized scale-1 runs toward an invariant shape.
    ShapeRescale(RescaleArgs),
    /// Once-reinforced or origin-excited walk on Z².
    Lattice(LatticeArgs),
    /// Check kernel normalization and the harmonic-measure samplers.
    ValidateKernels(ValidateArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON config, or the meta.json of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    m: Option<usize>,
    /// Treat monitor triggers as failures.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct OdeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EstimatorKind {
    ClosedForm,
    Chain,
    Stationary,
}

#[derive(Args, Debug)]
struct InvariantArgs {
    /// Rule-set JSON file.
    #[arg(long)]
    rules: PathBuf,
    /// `ball`, `sunflower`, `ellipse`, or an inline shape JSON object.
    #[arg(long, default_value = "ball")]
    shape: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1024)]
    m: usize,
    #[arg(long, value_enum, default_value = "closed-form")]
    estimator: EstimatorKind,
    #[arg(long, default_value_t = 1000)]
    burn: usize,
    #[arg(long, default_value_t = 100_000)]
    len: usize,
    /// Pass threshold for deterministic estimators.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Pass threshold in standard errors for the chain estimator.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated seed list.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Args, Debug)]
struct RescaleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Use the equivalent ε = 1/N runs.
    #[arg(long)]
    coupled: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WalkKind {
    Orrw,
    Oerw,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    walk: Option<WalkKind>,
    /// Reinforcement strength (ORRW).
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, value_enum)]
    excitation: Option<ExcitationKind>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    half_width: Option<i64>,
    /// Connectivity check interval in steps.
    #[arg(long)]
    check_every: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExcitationKind {
    ProportionalCoordinate,
    LargestCoordinate,
    BothCoordinates,
}

impl From<ExcitationKind> for Excitation {
    fn from(k: ExcitationKind) -> Self {
        match k {
            ExcitationKind::ProportionalCoordinate => Excitation::ProportionalCoordinate,
            ExcitationKind::LargestCoordinate => Excitation::LargestCoordinate,
            ExcitationKind::BothCoordinates => Excitation::BothCoordinates,
        }
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, default_value_t = 4096)]
    m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.02, 0.05, 0.1, 0.2])]
    etas: Vec<f64>,
    /// Walk-on-spheres exits for the KS test.
    #[arg(long, default_value_t = 100_000)]
    exits: usize,
    /// Exits per density estimate in the Monte Carlo comparison.
    #[arg(long, default_value_t = 20_000)]
    mc_exits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    kernel_tolerance: f64,
    #[arg(long, default_value_t = 0.006)]
    ks_tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub rules: RuleConfig,
    #[serde(default)]
    pub r0: ShapeSpec,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    pub eps: f64,
    pub horizon: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub snapshots: SnapshotPlan,
    #[serde(default)]
    pub clock: Clock,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_delta")]
    pub delta_density: f64,
    #[serde(default = "default_delta")]
    pub delta_radius: f64,
}

fn default_delta() -> f64 {
    1e-6
}

/// Config of `ode`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeRunConfig {
    pub rules: RuleConfig,
    #[serde(default)]
    pub r0: ShapeSpec,
    pub grid: GridSpec,
    pub horizon: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub integrator: Option<Integrator>,
    #[serde(default)]
    pub estimator: Estimator,
    #[serde(default = "default_record")]
    pub record: SnapshotPlan,
    #[serde(default)]
    pub seed: u64,
}

fn default_record() -> SnapshotPlan {
    SnapshotPlan::Uniform { count: 20 }
}

/// Contents of every `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta<C> {
    pub build: String,
    pub command: String,
    pub config: C,
}

impl<C> RunMeta<C> {
    pub fn new(command: &str, config: C) -> Self {
        Self {
            build: BUILD_ID.to_string(),
            command: command.to_string(),
            config,
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_ERROR,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_ASSERTION,
        Err(Error::MonitorTriggered { name, time }) => {
            eprintln!("strict mode: monitor `{name}` triggered at t={time}");
            EXIT_ASSERTION
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Ode(a) => cmd_ode(a),
        Command::InvariantCheck(a) => cmd_invariant(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::ShapeRescale(a) => cmd_rescale(a),
        Command::Lattice(a) => cmd_lattice(a),
        Command::ValidateKernels(a) => cmd_validate(a),
    }
}

/// Reads a config file, accepting either the bare config or a `meta.json`
/// written by the same command.
pub fn load_config<C: DeserializeOwned>(path: &Path, command: &str) -> Result<C> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_error(path, e))?;
    let is_meta = value.get("build").is_some()
        && value.get("command").is_some()
        && value.get("config").is_some();
    let body = if is_meta {
        if value["command"] != command {
            return Err(Error::Config(format!(
                "{} was written by `{}`, not `{command}`",
                path.display(),
                value["command"]
            )));
        }
        value["config"].clone()
    } else {
        value
    };
    serde_json::from_value(body).map_err(|e| parse_error(path, e))
}

fn parse_error(path: &Path, e: serde_json::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        reason: e.to_string(),
    }
}

fn required_config<C: DeserializeOwned>(common: &Common, command: &str) -> Result<C> {
    match &common.config {
        Some(p) => load_config(p, command),
        None => Err(Error::Config(format!("`{command}` needs --config"))),
    }
}

fn out_dir(common: &Common, command: &str) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("runs").join(command))
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and positive, got {v}"),
        ))
    }
}

fn cmd_simulate(a: SimulateArgs) -> Result<bool> {
    let mut cfg: SimulateConfig = required_config(&a.common, "simulate")?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(e) = a.eps {
        cfg.eps = e;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(m) = a.m {
        cfg.grid.m = m;
    }
    cfg.strict |= a.strict;
    positive("eps", cfg.eps)?;
    positive("horizon", cfg.horizon)?;

    let traj = run_simulation(&cfg)?;
    let dir = out_dir(&a.common, "simulate");
    write_trajectory(&dir, &traj, &RunMeta::new("simulate", &cfg))?;
    println!(
        "simulate: {} jumps, Leb {:.6} -> {:.6}, output in {}",
        traj.final_state.jumps,
        traj.snapshots
            .first()
            .map_or(Ok(f64::NAN), |s| s.r.leb_volume())?,
        traj.final_state.r.leb_volume()?,
        dir.display()
    );
    Ok(true)
}

/// Runs the process described by a `simulate` config.
pub fn run_simulation(cfg: &SimulateConfig) -> Result<crate::process::Trajectory> {
    let grid = cfg.grid.build()?;
    let rules = cfg.rules.build(grid.clone())?;
    let r0 = cfg.r0.build(grid.clone())?;
    let x0 = match &cfg.x0 {
        Some(c) => Point::from_slice(c)
            .ok_or_else(|| Error::Config("x0 must have 2 or 3 coordinates".into()))?,
        None => Point::origin(grid.dim()),
    };
    let mut sim = SimulationConfig::new(cfg.eps, cfg.horizon)
        .with_snapshots(cfg.snapshots.clone())
        .with_clock(cfg.clock);
    sim.strict = cfg.strict;
    sim.delta_density = cfg.delta_density;
    sim.delta_radius = cfg.delta_radius;
    simulate(r0, x0, &rules, &sim, &mut RngStream::new(cfg.seed))
}

fn cmd_ode(a: OdeArgs) -> Result<bool> {
    let mut cfg: OdeRunConfig = required_config(&a.common, "ode")?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(dt) = a.dt {
        cfg.dt = Some(dt);
    }
    if let Some(m) = a.m {
        cfg.grid.m = m;
    }
    positive("horizon", cfg.horizon)?;
    let grid = cfg.grid.build()?;
    let rules = cfg.rules.build(grid.clone())?;
    let r0 = cfg.r0.build(grid)?;
    let ode = OdeConfig {
        horizon: cfg.horizon,
        dt: cfg.dt,
        integrator: cfg.integrator,
        estimator: cfg.estimator,
        record: cfg.record.clone(),
    };
    let traj = integrate_ode(&r0, &rules, &ode, &mut RngStream::new(cfg.seed))?;
    let dir = out_dir(&a.common, "ode");
    write_ode(&dir, &traj, &RunMeta::new("ode", &cfg), None::<&()>)?;
    println!(
        "ode: {} records, max volume-law error {:.3e}, output in {}",
        traj.times.len(),
        traj.volume_law_error()?,
        dir.display()
    );
    Ok(true)
}

/// Parses a shape name or inline JSON.
pub fn parse_shape(s: &str) -> Result<ShapeSpec> {
    match s {
        "ball" => Ok(ShapeSpec::default()),
        "sunflower" => Ok(ShapeSpec::sunflower()),
        "ellipse" => Ok(ShapeSpec::Ellipse { b: 0.5 }),
        _ if s.trim_start().starts_with('{') => {
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
        }
        _ => Err(Error::Config(format!(
            "unknown shape `{s}` (expected ball, sunflower, ellipse or JSON)"
        ))),
    }
}

#[derive(Serialize)]
struct InvariantReport<'a> {
    build: &'a str,
    command: &'a str,
    rules: &'a RuleConfig,
    shape: &'a ShapeSpec,
    estimator: Estimator,
    residual: f64,
    stderr: Option<f64>,
    threshold: f64,
    passed: bool,
}

fn cmd_invariant(a: InvariantArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.rules).map_err(|e| Error::io(&a.rules, e))?;
    let rule_cfg = RuleConfig::from_json(&text)?;
    let shape = parse_shape(&a.shape)?;
    let grid = GridSpec::new(a.n, a.m).build()?;
    let rules = rule_cfg.build(grid.clone())?;
    let psi = shape.build(grid)?;
    let estimator = match a.estimator {
        EstimatorKind::ClosedForm => Estimator::ClosedForm,
        EstimatorKind::Chain => Estimator::Chain {
            burn: a.burn,
            len: a.len,
        },
        EstimatorKind::Stationary => Estimator::Stationary { nodes: 512 },
    };
    let res = invariant_residual(&psi, &rules, estimator, &mut RngStream::new(a.seed))?;
    let threshold = match res.stderr {
        Some(se) => a.sigmas * se,
        None => a.tolerance,
    };
    let passed = res.value <= threshold;
    let report = InvariantReport {
        build: BUILD_ID,
        command: "invariant-check",
        rules: &rule_cfg,
        shape: &shape,
        estimator,
        residual: res.value,
        stderr: res.stderr,
        threshold,
        passed,
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = &a.out {
        write_json(&dir.join("invariant_check.json"), &report)?;
    }
    Ok(passed)
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    let mut cfg: SweepConfig = required_config(&a.common, "sweep")?;
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    if let Some(m) = a.m {
        cfg.grid.m = m;
    }
    let res = averaging_sweep(&cfg)?;
    let dir = out_dir(&a.common, "sweep");
    write_json(&dir.join("meta.json"), &RunMeta::new("sweep", &cfg))?;
    write_sweep(&dir, &res)?;
    for s in &res.summary.per_epsilon {
        println!(
            "eps={:e}: median sup L2 {:.4e} (IQR {:.4e}..{:.4e}), {} triggered",
            s.epsilon, s.stats.median, s.stats.q1, s.stats.q3, s.triggered_runs
        );
    }
    println!("passed: {}", res.summary.passed);
    Ok(res.summary.passed)
}

fn cmd_rescale(a: RescaleArgs) -> Result<bool> {
    let mut cfg: RescaleConfig = required_config(&a.common, "shape-rescale")?;
    if let Some(s) = a.seeds {
        cfg.seeds = s;
    }
    cfg.coupled |= a.coupled;
    let res = shape_rescale_experiment(&cfg)?;
    let dir = out_dir(&a.common, "shape-rescale");
    write_json(&dir.join("meta.json"), &RunMeta::new("shape-rescale", &cfg))?;
    write_rescale(&dir, &res)?;
    for (n, m) in cfg.ladder.iter().zip(&res.medians) {
        println!("N={n}: median sup L2 {m:.4e}");
    }
    Ok(res.passed)
}

fn cmd_lattice(a: LatticeArgs) -> Result<bool> {
    let mut cfg: LatticeConfig = match &a.common.config {
        Some(p) => load_config(p, "lattice")?,
        None => {
            let rule = match a.walk {
                Some(WalkKind::Orrw) => WalkRule::Orrw {
                    a: a.a.unwrap_or(1.0),
                },
                Some(WalkKind::Oerw) => WalkRule::Oerw {
                    excitation: a.excitation.map_or(Excitation::BothCoordinates, Into::into),
                },
                None => return Err(Error::Config("`lattice` needs --config or --walk".into())),
            };
            LatticeConfig {
                rule,
                steps: a
                    .steps
                    .ok_or_else(|| Error::Config("`lattice` needs --steps".into()))?,
                half_width: DEFAULT_HALF_WIDTH,
                seed: 0,
                check_every: 0,
            }
        }
    };
    match (&mut cfg.rule, a.a, a.excitation) {
        (WalkRule::Orrw { a: strength }, Some(v), _) => *strength = v,
        (WalkRule::Oerw { excitation }, _, Some(k)) => *excitation = k.into(),
        _ => {}
    }
    if let Some(s) = a.steps {
        cfg.steps = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(h) = a.half_width {
        cfg.half_width = h;
    }
    if let Some(c) = a.check_every {
        cfg.check_every = c;
    }
    let (walk, summary) = run_lattice(&cfg)?;
    let dir = out_dir(&a.common, "lattice");
    write_lattice(&dir, &walk, &summary, &RunMeta::new("lattice", &cfg))?;
    println!(
        "lattice: {} steps, range {}, aspect {:.3}, halted {}, connected {}",
        summary.steps, summary.range_size, summary.aspect_ratio, summary.halted, summary.connected
    );
    Ok(summary.connected)
}

fn cmd_validate(a: ValidateArgs) -> Result<bool> {
    let kernels = kernel_normalization(&a.etas, 2, a.m)?;
    let wos = wos_disk_ks(0.5, a.exits, crate::rules::WOS_SHELL, a.seed)?;
    let mc = harmonic_mc_vs_exact(a.m.min(4096), 0.5, a.mc_exits, a.seed)?;
    let kernels_ok = kernels.iter().all(|k| k.max_error <= a.kernel_tolerance);
    let ks_ok = wos.ks < a.ks_tolerance;
    for k in &kernels {
        println!("kernel eta={}: max |1*g - 1| = {:.3e}", k.eta, k.max_error);
    }
    println!(
        "walk-on-spheres from (0.5, 0): KS = {:.5} over {} exits",
        wos.ks, wos.exits
    );
    println!(
        "harmonic-mc vs exact ball density: L1 = {:.4e} ({} exits)",
        mc.l1, mc.n_exits
    );
    let passed = kernels_ok && ks_ok;
    if let Some(dir) = &a.out {
        write_json(
            &dir.join("kernel_validation.json"),
            &serde_json::json!({
                "build": BUILD_ID,
                "kernels": kernels,
                "wos": wos,
                "harmonic_mc": mc,
                "passed": passed,
            }),
        )?;
    }
    Ok(passed)
}
