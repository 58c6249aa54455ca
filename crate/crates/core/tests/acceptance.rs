//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every reference value is recomputed here from closed
//! forms rather than taken from the library.

use std::f64::consts::{PI, TAU};
use std::time::{Duration, Instant};

use stargrowth::experiments::{averaging_sweep, Envelope, Expect, GridSpec, SweepConfig};
use stargrowth::lattice::{
    direction_chi_square, excitation_displacement, Excitation, LatticeWalk, WalkRule,
};
use stargrowth::ode::{integrate_ode, invariant_residual, Estimator, Integrator, OdeConfig};
use stargrowth::process::{
    coupled_unit_run, rescale_trajectory, simulate, step, Clock, GrowthState, SimulationConfig,
    SnapshotPlan,
};
use stargrowth::rules::wos::{sample_exit_direction, Ball};
use stargrowth::rules::{AxisNorm, HittingRule, RuleConfig, RuleSet, TransportRule, WOS_SHELL};
use stargrowth::shapes::ShapeSpec;
use stargrowth::sphere::{
    make_bump_kernel, make_grid, spherical_convolve, Point, Profile, RadialField,
};
use stargrowth::RngStream;

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn leb2(r: &RadialField) -> f64 {
    // area of a planar star domain on a uniform angular grid
    let m = r.len() as f64;
    r.values().iter().map(|v| v * v).sum::<f64>() * (TAU / m) / 2.0
}

fn osc(r: &RadialField) -> f64 {
    let v = r.values();
    v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
}

fn rule_set(m: usize, f: HittingRule, h: TransportRule) -> RuleSet {
    RuleConfig::new(f, h)
        .build(make_grid(2, m).unwrap())
        .unwrap()
}

fn kernel_normalization() -> Outcome {
    let m = 4096;
    let g = make_grid(2, m).unwrap();
    let one = RadialField::constant(g.clone(), 1.0);
    let mut worst: f64 = 0.0;
    for eta in [0.02, 0.05, 0.1, 0.2] {
        let k = make_bump_kernel(eta, g.clone(), Profile::Cosine).unwrap();
        let fast = spherical_convolve(&one, &k).unwrap();
        // direct sum over the uniform grid with equal weights 2π/M
        for j in (0..m).step_by(64) {
            let tj = TAU * j as f64 / m as f64;
            let direct: f64 = (0..m)
                .map(|i| k.eval((tj - TAU * i as f64 / m as f64).cos()))
                .sum::<f64>()
                / m as f64;
            worst = worst.max((direct - 1.0).abs());
        }
        for v in fast.values() {
            worst = worst.max((v - 1.0).abs());
        }
    }
    check(worst <= 1e-12, format!("max |1*g - 1| = {worst:.2e}"))
}

fn volume_law() -> Outcome {
    let m = 1024;
    let g = make_grid(2, m).unwrap();
    let r0 = ShapeSpec::sunflower().build(g).unwrap();
    let leb0 = leb2(&r0);
    let cfg = OdeConfig::new(2.0, Estimator::ClosedForm)
        .with_dt(1e-3)
        .with_integrator(Integrator::Rk4)
        .with_record(SnapshotPlan::Uniform { count: 200 });
    let mut worst: f64 = 0.0;
    for f in [
        HittingRule::BoundaryProportional,
        HittingRule::DistancePower { beta: -1.0 },
    ] {
        let rs = rule_set(m, f, TransportRule::Origin);
        let tr =
            integrate_ode(&r0, &rs, &cfg, &mut RngStream::new(0)).map_err(|e| e.to_string())?;
        for (t, r) in tr.times.iter().zip(&tr.states) {
            worst = worst.max((leb2(r) - leb0 - t).abs() / (1.0 + t));
        }
    }
    check(
        worst <= 1e-4,
        format!("max |Leb_t - Leb_0 - t|/(1+t) = {worst:.2e}"),
    )
}

fn invariant_trajectory() -> Outcome {
    let m = 1024;
    let g = make_grid(2, m).unwrap();
    let r0 = ShapeSpec::sunflower().build(g).unwrap();
    let leb0 = leb2(&r0);
    let rs = rule_set(m, HittingRule::BoundaryProportional, TransportRule::Origin);
    let cfg =
        OdeConfig::new(2.0, Estimator::ClosedForm).with_record(SnapshotPlan::Uniform { count: 8 });
    let tr = integrate_ode(&r0, &rs, &cfg, &mut RngStream::new(0)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (t, r) in tr.times.iter().zip(&tr.states) {
        let c = (1.0 + t / leb0).sqrt();
        for (a, b) in r.values().iter().zip(r0.values()) {
            worst = worst.max((a - c * b).abs());
        }
    }
    check(
        worst <= 1e-6,
        format!("sup |r_t - (1+t/Leb0)^(1/2) r0| = {worst:.2e}"),
    )
}

fn invariant_residuals() -> Outcome {
    let m = 1024;
    let g = make_grid(2, m).unwrap();
    let bp = rule_set(m, HittingRule::BoundaryProportional, TransportRule::Origin);
    let mut rng = RngStream::new(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let coeffs: Vec<(f64, f64)> = (0..6)
            .map(|_| (0.1 * (rng.uniform() - 0.5), 0.1 * (rng.uniform() - 0.5)))
            .collect();
        let psi = RadialField::from_angle_fn(g.clone(), |t| {
            1.0 + coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| a * ((k + 1) as f64 * t).cos() + b * ((k + 1) as f64 * t).sin())
                .sum::<f64>()
        });
        let res = invariant_residual(&psi, &bp, Estimator::ClosedForm, &mut RngStream::new(0))
            .map_err(|e| e.to_string())?;
        worst = worst.max(res.value);
    }
    let harm = rule_set(
        m,
        HittingRule::HarmonicExactBall,
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let ball = RadialField::constant(g, 1.0);
    let res = invariant_residual(
        &ball,
        &harm,
        Estimator::Chain {
            burn: 1000,
            len: 100_000,
        },
        &mut RngStream::new(7),
    )
    .map_err(|e| e.to_string())?;
    let se = res.stderr.unwrap_or(f64::NAN);
    check(
        worst <= 1e-10 && res.value <= 3.0 * se,
        format!(
            "boundary-proportional max residual {worst:.2e}; harmonic ball residual {:.3e} vs 3*stderr {:.3e}",
            res.value,
            3.0 * se
        ),
    )
}

fn harmonic_sampler() -> Outcome {
    let rho: f64 = 0.5;
    let n = 100_000;
    let disk = Ball {
        radius: 1.0,
        dim: 2,
    };
    let base = RngStream::new(99);
    let mut angles: Vec<f64> = (0..n)
        .map(|k| {
            let mut s = base.substream("ks", k);
            let a = sample_exit_direction(&disk, Point::new2(rho, 0.0), WOS_SHELL, &mut s)
                .unwrap()
                .angle();
            if a > PI {
                a - TAU
            } else {
                a
            }
        })
        .collect();
    angles.sort_by(f64::total_cmp);
    // exact exit law from (ρ, 0): integral of the Poisson kernel
    let cdf = |t: f64| 0.5 + ((1.0 + rho) / (1.0 - rho) * (t / 2.0).tan()).atan() / PI;
    let ks = angles
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = cdf(t);
            (f - i as f64 / n as f64)
                .abs()
                .max(((i + 1) as f64 / n as f64 - f).abs())
        })
        .fold(0.0, f64::max);
    check(ks < 0.006, format!("KS = {ks:.5}"))
}

fn scaling_coupling() -> Outcome {
    let m = 8192;
    let g = make_grid(2, m).unwrap();
    let r0 = ShapeSpec::Sunflower { k: 3, amp: 0.2 }
        .build(g.clone())
        .unwrap();
    let x0 = Point::new2(0.1, -0.05);
    let hittings = [
        HittingRule::Uniform,
        HittingRule::BoundaryProportional,
        HittingRule::DistancePower { beta: -1.0 },
        HittingRule::DistancePower { beta: 2.0 },
        HittingRule::HarmonicMc {
            n_exits: 1000,
            refresh: 1,
        },
    ];
    let transports = [
        TransportRule::Origin,
        TransportRule::GammaLinear { gamma: 0.5 },
        TransportRule::NormScale {
            norm: AxisNorm::L1,
            divisor: 10.0,
        },
        TransportRule::StatisticalCenter,
    ];
    let mut worst: f64 = 0.0;
    let mut sets = 0;
    for f in &hittings {
        for h in &transports {
            let rs = RuleConfig::new(f.clone(), h.clone())
                .build(g.clone())
                .unwrap();
            if !rs.is_scale_invariant() {
                continue;
            }
            sets += 1;
            for eps in [1e-2, 1e-3] {
                let horizon = 0.1;
                let plan = SnapshotPlan::Uniform { count: 4 };
                let cfg = SimulationConfig::new(eps, horizon).with_snapshots(plan);
                let small = simulate(r0.clone(), x0, &rs, &cfg, &mut RngStream::new(5))
                    .map_err(|e| format!("{}+{} eps={eps}: {e}", f.name(), h.name()))?;
                let c = eps.sqrt();
                let unit =
                    coupled_unit_run(&small, r0.clone(), x0, &rs, &cfg, &mut RngStream::new(5))
                        .map_err(|e| format!("{}+{} scale 1: {e}", f.name(), h.name()))?;
                let mapped = rescale_trajectory(&unit, c).map_err(|e| e.to_string())?;
                if mapped.snapshots.len() != small.snapshots.len()
                    || mapped.jumps.len() != small.jumps.len()
                {
                    return Err(format!(
                        "{}+{} eps={eps}: jump counts differ",
                        f.name(),
                        h.name()
                    ));
                }
                let mut gap: f64 = 0.0;
                for (a, b) in mapped.snapshots.iter().zip(&small.snapshots) {
                    for (u, v) in a.r.values().iter().zip(b.r.values()) {
                        gap = gap.max((u - v).abs());
                    }
                }
                if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
                    println!("  {}+{} eps={eps}: gap {gap:.2e}", f.name(), h.name());
                }
                worst = worst.max(gap);
            }
        }
    }
    check(
        worst <= 1e-10,
        format!("{sets} rule sets, max node-wise gap {worst:.2e}"),
    )
}

fn averaging_principle() -> Outcome {
    let cfg = SweepConfig {
        rules: RuleConfig::new(
            HittingRule::DistancePower { beta: -1.0 },
            TransportRule::GammaLinear { gamma: 0.5 },
        ),
        r0: ShapeSpec::Fourier {
            a0: 1.0,
            cos: vec![0.0, 0.0, 0.2],
            sin: vec![],
        },
        x0: None,
        epsilons: vec![1e-2, 1e-3, 1e-4],
        seeds: vec![1, 2, 3, 4, 5],
        horizon: 1.0,
        grid: GridSpec::new(2, 16384),
        samples: 20,
        estimator: Estimator::Stationary { nodes: 512 },
        dt: None,
        clock: Clock::Exponential,
        expect: Some(Expect {
            monotone: true,
            envelope: Some(Envelope {
                coef: 2.2,
                exponent: 0.25,
            }),
        }),
    };
    let res = averaging_sweep(&cfg).map_err(|e| e.to_string())?;
    let s = &res.summary;
    let medians: Vec<String> = s
        .per_epsilon
        .iter()
        .map(|e| format!("{:.0e}:{:.4}", e.epsilon, e.stats.median))
        .collect();
    let sign_ok = s.sign_tests.iter().all(|t| t.p_value < 0.05);
    let p: Vec<String> = s
        .sign_tests
        .iter()
        .map(|t| format!("{:.3}", t.p_value))
        .collect();
    check(
        s.passed && s.medians_decreasing && sign_ok,
        format!(
            "medians {} decreasing={} envelope={:?} sign-test p=[{}]",
            medians.join(" "),
            s.medians_decreasing,
            s.within_envelope,
            p.join(", ")
        ),
    )
}

fn ball_attractiveness() -> Outcome {
    let m = 1024;
    let g = make_grid(2, m).unwrap();
    let mut rc = RuleConfig::new(
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::Origin,
    );
    rc.force_unsmoothed = true;
    let rs = rc.build(g.clone()).unwrap();
    let r0 = ShapeSpec::sunflower().build(g).unwrap();
    let leb0 = leb2(&r0);
    let cfg = OdeConfig::new(5.0, Estimator::ClosedForm)
        .with_integrator(Integrator::Rk4)
        .with_record(SnapshotPlan::Uniform { count: 100 });
    let tr = integrate_ode(&r0, &rs, &cfg, &mut RngStream::new(0)).map_err(|e| e.to_string())?;
    let osc0 = osc(&r0) / leb0.sqrt();
    let mut margin = f64::INFINITY;
    for (t, r) in tr.times.iter().zip(&tr.states) {
        let normalized = osc(r) / (leb0 + t).sqrt();
        let bound = osc0 * ((leb0 + t) / leb0).powf(-0.5) + 1e-3;
        margin = margin.min(bound - normalized);
    }
    let last = tr.states.last().unwrap();
    check(
        margin >= 0.0,
        format!(
            "min slack {margin:.3e}; osc of normalized profile {:.4} -> {:.4}",
            osc0,
            osc(last) / (leb0 + 5.0).sqrt()
        ),
    )
}

fn per_jump_volume() -> Outcome {
    let eps: f64 = 1e-4;
    let m = 16384;
    let g = make_grid(2, m).unwrap();
    let rs = rule_set(m, HittingRule::Uniform, TransportRule::Origin);
    let mut st = GrowthState::new(RadialField::constant(g, 1.0), Point::origin(2)).unwrap();
    let mut rng = RngStream::new(11);
    let n = 10_000;
    let mut total = 0.0;
    for _ in 0..n {
        let before = leb2(&st.r);
        step(&mut st, &rs, eps, &mut rng).map_err(|e| e.to_string())?;
        total += (leb2(&st.r) - before) / eps;
    }
    let mean = total / n as f64;
    let tol = 5.0 * eps.sqrt();
    check(
        (mean - 1.0).abs() <= tol,
        format!("mean dLeb/eps = {mean:.6} (allowed 1 ± {tol:.3})"),
    )
}

fn lattice() -> Outcome {
    let mut w = LatticeWalk::new(WalkRule::Orrw { a: 1.0 }, 1000).unwrap();
    let mut rng = RngStream::new(31);
    w.run(100_000, &mut rng);
    if w.halted {
        return Err("walk left the box".into());
    }
    let (stat, p) = direction_chi_square(&w.direction_counts);

    let mut r = RngStream::new(0);
    let both = excitation_displacement(Excitation::BothCoordinates, (3, -2), &mut r);
    let largest = excitation_displacement(Excitation::LargestCoordinate, (3, -2), &mut r);
    let mut origin = LatticeWalk::new(
        WalkRule::Oerw {
            excitation: Excitation::LargestCoordinate,
        },
        10,
    )
    .unwrap();
    origin.step(&mut r);
    let srw_first =
        origin.excitation_moves == 0 && origin.position.0.abs() + origin.position.1.abs() == 1;
    check(
        p > 0.001 && both == (-1, 1) && largest == (-1, 0) && srw_first,
        format!("ORRW a=1 chi2={stat:.2} p={p:.3}; both(3,-2)={both:?}; largest(3,-2)={largest:?}"),
    )
}

fn main() {
    let criteria = [
        Criterion {
            name: "kernel-normalization",
            limit: Duration::from_secs(5),
            run: kernel_normalization,
        },
        Criterion {
            name: "volume-law",
            limit: Duration::from_secs(60),
            run: volume_law,
        },
        Criterion {
            name: "invariant-trajectory",
            limit: Duration::from_secs(60),
            run: invariant_trajectory,
        },
        Criterion {
            name: "invariant-residuals",
            limit: Duration::from_secs(300),
            run: invariant_residuals,
        },
        Criterion {
            name: "harmonic-sampler-ks",
            limit: Duration::from_secs(120),
            run: harmonic_sampler,
        },
        Criterion {
            name: "scaling-coupling",
            limit: Duration::from_secs(120),
            run: scaling_coupling,
        },
        Criterion {
            name: "averaging-principle",
            limit: Duration::from_secs(1800),
            run: averaging_principle,
        },
        Criterion {
            name: "ball-attractiveness",
            limit: Duration::from_secs(60),
            run: ball_attractiveness,
        },
        Criterion {
            name: "per-jump-volume",
            limit: Duration::from_secs(60),
            run: per_jump_volume,
        },
        Criterion {
            name: "lattice",
            limit: Duration::from_secs(120),
            run: lattice,
        },
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for c in &criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let in_time = took <= c.limit;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {} [{:.1}s of {}s] {}",
            if ok { "PASS" } else { "FAIL" },
            c.name,
            took.as_secs_f64(),
            c.limit.as_secs(),
            detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
