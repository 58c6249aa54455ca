use approx::assert_relative_eq;

use super::*;
use crate::rules::{HittingRule, TransportRule};
use crate::sphere::{make_bump_kernel, make_grid, Profile, SphereGrid};
use std::sync::Arc;

fn rules(grid: &Arc<SphereGrid>, f: HittingRule, h: TransportRule) -> RuleSet {
    RuleSet::new(
        f,
        h,
        make_bump_kernel(0.05, grid.clone(), Profile::Cosine).unwrap(),
    )
    .unwrap()
}

fn disk(grid: &Arc<SphereGrid>) -> RadialField {
    RadialField::constant(grid.clone(), 1.0)
}

#[test]
fn single_jump_adds_about_eps_of_volume() {
    let g = make_grid(2, 16384).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let eps = 1e-4;
    let mut st = GrowthState::new(disk(&g), Point::origin(2)).unwrap();
    let before = st.r.clone();
    let rec = step(&mut st, &rs, eps, &mut RngStream::new(3)).unwrap();
    let delta = rec.dleb / eps - 1.0;
    assert!(delta.abs() <= 3.0 * eps.sqrt(), "{delta}");
    assert!(delta > 0.0);
    assert_relative_eq!(
        rec.dleb,
        st.r.leb_volume().unwrap() - before.leb_volume().unwrap(),
        max_relative = 1e-10
    );
    for (a, b) in st.r.values().iter().zip(before.values()) {
        assert!(a >= b);
    }
}

#[test]
fn runs_are_bit_reproducible_and_monotone() {
    let g = make_grid(2, 2048).unwrap();
    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let cfg = SimulationConfig::new(1e-2, 0.5).with_snapshots(SnapshotPlan::Uniform { count: 5 });
    let run = |seed| {
        simulate(
            disk(&g),
            Point::origin(2),
            &rs,
            &cfg,
            &mut RngStream::new(seed),
        )
        .unwrap()
    };
    let a = run(9);
    let b = run(9);
    assert_eq!(a, b);
    assert_ne!(a.final_state.r, run(10).final_state.r);
    for w in a.snapshots.windows(2) {
        assert!(w[1].t > w[0].t);
        for (x, y) in w[1].r.values().iter().zip(w[0].r.values()) {
            assert!(x >= y);
        }
    }
    assert!(a.jumps.iter().all(|j| j.dleb > 0.0));
}

#[test]
fn volume_bookkeeping_is_exact() {
    let g = make_grid(2, 2048).unwrap();
    let rs = rules(&g, HittingRule::BoundaryProportional, TransportRule::Origin);
    let r0 = RadialField::from_angle_fn(g.clone(), |t| 1.0 + 0.3 * (6.0 * t).cos());
    let leb0 = r0.leb_volume().unwrap();
    let cfg = SimulationConfig::new(1e-2, 1.0).with_snapshots(SnapshotPlan::Uniform { count: 4 });
    let tr = simulate(r0, Point::origin(2), &rs, &cfg, &mut RngStream::new(1)).unwrap();
    let total: f64 = tr.jumps.iter().map(|j| j.dleb).sum();
    let leb_t = tr.final_state.r.leb_volume().unwrap();
    assert_relative_eq!(total, leb_t - leb0, max_relative = 1e-10);
    // held snapshots contain exactly the jumps up to their time
    for s in &tr.snapshots {
        let upto: f64 = tr.jumps.iter().filter(|j| j.t <= s.t).map(|j| j.dleb).sum();
        assert_relative_eq!(
            s.r.leb_volume().unwrap() - leb0,
            upto,
            max_relative = 1e-10,
            epsilon = 1e-14
        );
    }
}

#[test]
fn poisson_clock_counts_and_volume_growth() {
    let g = make_grid(2, 8192).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let (eps, horizon) = (1e-3, 1.0);
    let cfg =
        SimulationConfig::new(eps, horizon).with_snapshots(SnapshotPlan::Uniform { count: 1 });
    let seeds = 50;
    let mut total = 0usize;
    let mut grown_sum = 0.0;
    for seed in 0..seeds {
        let tr = simulate(
            disk(&g),
            Point::origin(2),
            &rs,
            &cfg,
            &mut RngStream::new(seed),
        )
        .unwrap();
        let jumps = tr.jumps.len() as f64;
        total += tr.jumps.len();
        let grown = tr.final_state.r.leb_volume().unwrap() - std::f64::consts::PI;
        grown_sum += grown;
        // each bump adds ε up to a relative O(η) = O(ε^{1/2}) term
        assert!(
            (grown - eps * jumps).abs() <= 5.0 * eps.sqrt() * eps * jumps,
            "seed {seed}: {grown} after {jumps} jumps"
        );
    }
    let n = seeds as f64;
    let mean = total as f64 / n;
    let expected = horizon / eps;
    assert!(
        (mean - expected).abs() <= 3.0 * (expected / n).sqrt(),
        "{mean}"
    );
    let mean_grown = grown_sum / n;
    let spread = 5.0 * eps.sqrt() + 3.0 * (eps / horizon / n).sqrt();
    assert!(
        (mean_grown - horizon).abs() <= spread * horizon,
        "{mean_grown}"
    );
}

#[test]
fn fixed_clock_jumps_on_a_lattice_of_times() {
    let g = make_grid(2, 4096).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let cfg = SimulationConfig::new(1e-2, 0.5).with_clock(Clock::Fixed);
    let tr = simulate(
        disk(&g),
        Point::origin(2),
        &rs,
        &cfg,
        &mut RngStream::new(0),
    )
    .unwrap();
    assert!((49..=50).contains(&tr.jumps.len()));
}

#[test]
fn every_jump_plan_records_each_state() {
    let g = make_grid(2, 2048).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let cfg = SimulationConfig::new(1e-2, 0.2).with_snapshots(SnapshotPlan::EveryJump);
    let tr = simulate(
        disk(&g),
        Point::origin(2),
        &rs,
        &cfg,
        &mut RngStream::new(0),
    )
    .unwrap();
    assert_eq!(tr.snapshots.len(), tr.jumps.len() + 2);
    assert_eq!(tr.at(0.2).unwrap().r, tr.final_state.r);
}

#[test]
fn identity_rescaling_is_a_no_op() {
    let g = make_grid(2, 2048).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let cfg = SimulationConfig::new(1e-2, 0.2);
    let tr = simulate(
        disk(&g),
        Point::origin(2),
        &rs,
        &cfg,
        &mut RngStream::new(0),
    )
    .unwrap();
    assert_eq!(rescale_trajectory(&tr, 1.0).unwrap(), tr);
    let big = rescale_trajectory(&tr, 3.0).unwrap();
    assert_relative_eq!(
        big.final_state.r.leb_volume().unwrap(),
        9.0 * tr.final_state.r.leb_volume().unwrap(),
        max_relative = 1e-12
    );
}

#[test]
fn strict_mode_turns_triggers_into_errors() {
    let g = make_grid(2, 2048).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let mut cfg = SimulationConfig::new(1e-2, 0.2);
    cfg.delta_density = 1.0;
    let tr = simulate(
        disk(&g),
        Point::origin(2),
        &rs,
        &cfg,
        &mut RngStream::new(0),
    )
    .unwrap();
    assert!(tr.monitors.density_triggered().is_some());
    cfg.strict = true;
    let err = simulate(
        disk(&g),
        Point::origin(2),
        &rs,
        &cfg,
        &mut RngStream::new(0),
    );
    assert!(matches!(
        err,
        Err(Error::MonitorTriggered {
            name: "density",
            ..
        })
    ));
}

#[test]
fn trajectory_files_are_written() {
    let g = make_grid(2, 2048).unwrap();
    let rs = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let cfg = SimulationConfig::new(1e-2, 0.1);
    let tr = simulate(
        disk(&g),
        Point::origin(2),
        &rs,
        &cfg,
        &mut RngStream::new(0),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_trajectory(dir.path(), &tr, &serde_json::json!({"seed": 0})).unwrap();
    for f in TRAJECTORY_FILES {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let jumps = std::fs::read_to_string(dir.path().join("jumps.csv")).unwrap();
    assert_eq!(jumps.lines().count(), tr.jumps.len() + 1);
}
