use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use approx::assert_relative_eq;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::*;
use crate::sphere::{make_bump_kernel, make_grid, Profile, SphereGrid};

fn rules(grid: &Arc<SphereGrid>, f: HittingRule, h: TransportRule) -> RuleSet {
    RuleSet::new(
        f,
        h,
        make_bump_kernel(0.05, grid.clone(), Profile::Cosine).unwrap(),
    )
    .unwrap()
}

fn sunflower(grid: &Arc<SphereGrid>) -> RadialField {
    RadialField::from_angle_fn(grid.clone(), |t| 1.0 + 0.3 * (6.0 * t).cos())
}

fn l2(a: &RadialField, b: &RadialField) -> f64 {
    a.zip_map(b, |x, y| x - y).unwrap().lp_norm(2.0).unwrap()
}

#[test]
fn trivial_chains() {
    let g = make_grid(2, 512).unwrap();
    let one = RadialField::constant(g.clone(), 1.0);
    let o = rules(&g, HittingRule::Uniform, TransportRule::Origin);
    let xs = frozen_chain_run(
        &one,
        &o,
        Point::new2(0.3, 0.0),
        0,
        20,
        &mut RngStream::new(1),
    )
    .unwrap();
    assert!(xs.iter().all(|x| x.norm() == 0.0));
    let c = rules(&g, HittingRule::Uniform, TransportRule::StatisticalCenter);
    let xs = frozen_chain_run(&one, &c, Point::origin(2), 0, 20, &mut RngStream::new(1)).unwrap();
    assert!(xs.iter().all(|x| x.norm() < 1e-12));
}

#[test]
fn harmonic_chain_lives_on_the_half_circle_with_uniform_angles() {
    let g = make_grid(2, 1024).unwrap();
    let one = RadialField::constant(g.clone(), 1.0);
    let rs = rules(
        &g,
        HittingRule::HarmonicExactBall,
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let n = 10_000;
    let xs = frozen_chain_run(&one, &rs, Point::origin(2), 100, n, &mut RngStream::new(5)).unwrap();
    let mut bins = [0usize; 32];
    for x in &xs {
        assert!((x.norm() - 0.5).abs() < 1e-9);
        bins[((x.angle() / TAU * 32.0) as usize).min(31)] += 1;
    }
    let e = n as f64 / 32.0;
    let chi2: f64 = bins.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let p = 1.0 - ChiSquared::new(31.0).unwrap().cdf(chi2);
    assert!(p > 1e-3, "chi2 {chi2}, p {p}");
}

#[test]
fn closed_form_distance_power_at_the_origin() {
    let g = make_grid(2, 1024).unwrap();
    let r = sunflower(&g);
    let w = TAU / 1024.0;
    for beta in [-1.0, -0.5, 0.7, 2.0] {
        let rs = rules(
            &g,
            HittingRule::DistancePower { beta },
            TransportRule::Origin,
        )
        .unsmoothed();
        let got = closed_form_bbar(&r, &rs).unwrap();
        let q = 1.0 + beta;
        let denom: f64 = r.values().iter().map(|v| v.powf(q) * w).sum();
        for (b, rv) in got.values().iter().zip(r.values()) {
            assert_relative_eq!(*b, rv.powf(beta) / denom, max_relative = 1e-11);
        }
    }
    // q = 0: the integral of r^0 is the circumference, so b̄ = 1 / (2π r)
    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::Origin,
    )
    .unsmoothed();
    let got = closed_form_bbar(&r, &rs).unwrap();
    for (b, rv) in got.values().iter().zip(r.values()) {
        assert_relative_eq!(*b, 1.0 / (TAU * rv), max_relative = 1e-12);
    }
}

#[test]
fn boundary_proportional_chain_agrees_with_closed_form() {
    let g = make_grid(2, 1024).unwrap();
    let r = sunflower(&g);
    let rs = rules(
        &g,
        HittingRule::BoundaryProportional,
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let leb = r.values().iter().map(|v| v * v).sum::<f64>() * TAU / 1024.0 / 2.0;
    let cf = closed_form_bbar(&r, &rs).unwrap();
    let ch = bbar(
        &r,
        &rs,
        Estimator::Chain { burn: 10, len: 640 },
        &mut RngStream::new(2),
    )
    .unwrap();
    let se = ch.stderr.unwrap();
    for j in 0..r.len() {
        assert_relative_eq!(
            cf.values()[j],
            r.values()[j] / (2.0 * leb),
            max_relative = 1e-12
        );
        assert!((ch.bbar.values()[j] - cf.values()[j]).abs() <= 3.0 * se.values()[j] + 1e-12);
    }
}

#[test]
fn uniform_drift_on_the_disk() {
    let g = make_grid(2, 512).unwrap();
    let one = RadialField::constant(g.clone(), 1.0);
    for h in [
        TransportRule::Origin,
        TransportRule::GammaLinear { gamma: 0.3 },
        TransportRule::StepBoth,
    ] {
        let rs = rules(&g, HittingRule::Uniform, h);
        let b = closed_form_bbar(&one, &rs).unwrap();
        assert!(b.values().iter().all(|v| (v - 1.0 / TAU).abs() < 1e-14));
    }
    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: 1.0 },
        TransportRule::GammaLinear { gamma: 0.3 },
    );
    assert!(matches!(
        closed_form_bbar(&one, &rs),
        Err(Error::NoClosedForm(_))
    ));
}

#[test]
fn stationary_estimator_matches_closed_forms_and_the_chain() {
    let g = make_grid(2, 1024).unwrap();
    let r = sunflower(&g);
    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::Origin,
    );
    let st = bbar(
        &r,
        &rs,
        Estimator::Stationary { nodes: 256 },
        &mut RngStream::new(0),
    )
    .unwrap();
    assert!(l2(&st.bbar, &closed_form_bbar(&r, &rs).unwrap()) < 1e-12);

    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let st = bbar(
        &r,
        &rs,
        Estimator::Stationary { nodes: 512 },
        &mut RngStream::new(0),
    )
    .unwrap();
    let ch = bbar(
        &r,
        &rs,
        Estimator::Chain {
            burn: 100,
            len: 20_000,
        },
        &mut RngStream::new(3),
    )
    .unwrap();
    let se = ch.stderr.unwrap().map(|v| v * v).integral().sqrt();
    assert!(
        l2(&st.bbar, &ch.bbar) < 3.0 * se,
        "{} vs {}",
        l2(&st.bbar, &ch.bbar),
        se
    );
    // the volume rate ∫ r b̄ dσ is exactly 1
    let rate: f64 = r.zip_map(&st.bbar, |a, b| a * b).unwrap().integral();
    assert_relative_eq!(rate, 1.0, max_relative = 1e-10);
}

#[test]
fn stationary_estimator_is_deterministic_and_scales() {
    let g = make_grid(2, 1024).unwrap();
    let r = sunflower(&g);
    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let est = Estimator::Stationary { nodes: 128 };
    let a = bbar(&r, &rs, est, &mut RngStream::new(0)).unwrap();
    let b = bbar(&r, &rs, est, &mut RngStream::new(99)).unwrap();
    assert_eq!(a, b);
    let c = 2.5;
    let scaled = bbar(&r.scaled(c), &rs, est, &mut RngStream::new(0)).unwrap();
    for (x, y) in scaled.bbar.values().iter().zip(a.bbar.values()) {
        assert_relative_eq!(*x, y / c, max_relative = 1e-9);
    }
}

#[test]
fn chain_stderr_follows_the_clt() {
    let g = make_grid(2, 512).unwrap();
    let one = RadialField::constant(g.clone(), 1.0);
    let rs = rules(
        &g,
        HittingRule::HarmonicExactBall,
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let se = |len, seed| {
        let e = bbar(
            &one,
            &rs,
            Estimator::Chain { burn: 100, len },
            &mut RngStream::new(seed),
        )
        .unwrap();
        e.stderr.unwrap().values().iter().sum::<f64>()
    };
    let ratio = se(8_000, 1) / se(16_000, 2);
    let ideal = 2f64.sqrt();
    assert!(ratio > ideal / 1.5 && ratio < ideal * 1.5, "{ratio}");
}

#[test]
fn invariant_trajectory_and_volume_law() {
    let g = make_grid(2, 1024).unwrap();
    let r0 = sunflower(&g);
    let leb0 = r0.leb_volume().unwrap();
    let rs = rules(&g, HittingRule::BoundaryProportional, TransportRule::Origin);
    let cfg = OdeConfig::new(2.0, Estimator::ClosedForm).with_dt(1e-3);
    let tr = integrate_ode(&r0, &rs, &cfg, &mut RngStream::new(0)).unwrap();
    let last = tr.states.last().unwrap();
    let factor = (1.0 + 2.0 / leb0).sqrt();
    for (a, b) in last.values().iter().zip(r0.values()) {
        assert!((a - factor * b).abs() < 1e-6);
    }
    for (t, s) in tr.times.iter().zip(&tr.states) {
        let p = normalized_profile(s, *t, leb0).unwrap();
        let p0 = normalized_profile(&r0, 0.0, leb0).unwrap();
        assert!(l2(&p, &p0) < 1e-8);
    }
    assert!(tr.volume_law_error().unwrap() <= 1e-4 * 3.0);
}

#[test]
fn negative_power_flattens_the_profile() {
    let g = make_grid(2, 1024).unwrap();
    let r0 = sunflower(&g);
    let leb0 = r0.leb_volume().unwrap();
    let rs = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::Origin,
    )
    .unsmoothed();
    let cfg = OdeConfig::new(2.0, Estimator::ClosedForm)
        .with_dt(1e-3)
        .with_record(SnapshotPlan::Uniform { count: 20 });
    let tr = integrate_ode(&r0, &rs, &cfg, &mut RngStream::new(0)).unwrap();
    let osc: Vec<f64> = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| normalized_profile(s, *t, leb0).unwrap().oscillation())
        .collect();
    assert!(osc.windows(2).all(|w| w[1] < w[0]));
    for (t, s) in tr.times.iter().zip(&tr.states) {
        assert!((s.leb_volume().unwrap() - leb0 - t).abs() <= 1e-4 * (1.0 + t));
    }
}

#[test]
fn residuals() {
    let g = make_grid(2, 1024).unwrap();
    let bp = rules(&g, HittingRule::BoundaryProportional, TransportRule::Origin);
    let psi = sunflower(&g);
    let res = invariant_residual(&psi, &bp, Estimator::ClosedForm, &mut RngStream::new(0)).unwrap();
    assert!(res.value <= 1e-10);

    let ellipse = RadialField::from_angle_fn(g.clone(), |t| {
        1.0 / (t.cos().powi(2) + 4.0 * t.sin().powi(2)).sqrt()
    });
    let dp = rules(
        &g,
        HittingRule::DistancePower { beta: -1.0 },
        TransportRule::Origin,
    )
    .unsmoothed();
    let cf =
        invariant_residual(&ellipse, &dp, Estimator::ClosedForm, &mut RngStream::new(0)).unwrap();
    assert!(cf.value > 1e-2, "{cf:?}");
    let ch = invariant_residual(
        &ellipse,
        &dp,
        Estimator::Chain { burn: 0, len: 64 },
        &mut RngStream::new(0),
    )
    .unwrap();
    assert!(ch.value > 10.0 * ch.stderr.unwrap());

    let one = RadialField::constant(g.clone(), 1.0);
    assert!(normalized_profile(&one, 0.0, PI)
        .unwrap()
        .values()
        .iter()
        .all(|v| (v - PI.powf(-0.5)).abs() < 1e-15));
}

#[test]
fn dispersion_is_small_for_an_ergodic_chain() {
    let g = make_grid(2, 512).unwrap();
    let one = RadialField::constant(g.clone(), 1.0);
    let rs = rules(
        &g,
        HittingRule::HarmonicExactBall,
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let starts = [
        Point::origin(2),
        Point::new2(0.5, 0.0),
        Point::new2(0.0, -0.5),
    ];
    let d = multistart_dispersion(&one, &rs, &starts, 100, 4000, &RngStream::new(4)).unwrap();
    assert!(d < 0.05, "{d}");
}
