//! Numerical self-checks of the kernels and samplers against exact laws.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::rules::wos::{sample_exit_direction, Ball};
use crate::rules::{HittingRule, RuleSet, TransportRule};
use crate::sphere::{make_bump_kernel, make_grid, spherical_convolve, Point, Profile, RadialField};

/// Distribution function of the planar Brownian exit angle from `(ρ, 0)` in
/// the unit disk, for `θ ∈ (−π, π]`.
pub fn poisson_disk_cdf(rho: f64, theta: f64) -> f64 {
    0.5 + ((1.0 + rho) / (1.0 - rho) * (theta / 2.0).tan()).atan() / PI
}

/// Maps an angle in `[0, 2π)` to `(−π, π]`.
pub fn centered_angle(a: f64) -> f64 {
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Two-sided Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub eta: f64,
    pub m: usize,
    /// `max_j |(1 ⋆ g_η)_j − 1|`.
    pub max_error: f64,
}

/// Convolves the constant 1 with the bump kernel at each `η`.
pub fn kernel_normalization(etas: &[f64], n: usize, m: usize) -> Result<Vec<KernelCheck>> {
    let grid = make_grid(n, m)?;
    let one = RadialField::constant(grid.clone(), 1.0);
    etas.iter()
        .map(|&eta| {
            let k = make_bump_kernel(eta, grid.clone(), Profile::Cosine)?;
            let c = spherical_convolve(&one, &k)?;
            let max_error = c
                .values()
                .iter()
                .map(|v| (v - 1.0).abs())
                .fold(0.0, f64::max);
            Ok(KernelCheck { eta, m, max_error })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExitCheck {
    pub rho: f64,
    pub exits: usize,
    pub ks: f64,
}

/// KS distance between walk-on-spheres exits from `(ρ, 0)` in the unit
/// disk and the exact exit law.
pub fn wos_disk_ks(rho: f64, exits: usize, shell: f64, seed: u64) -> Result<ExitCheck> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid("rho", "start must lie inside the unit disk"));
    }
    let disk = Ball {
        radius: 1.0,
        dim: 2,
    };
    let base = RngStream::new(seed);
    let angles: Vec<f64> = (0..exits)
        .into_par_iter()
        .map(|k| {
            let mut s = base.substream("wos-disk", k as u64);
            sample_exit_direction(&disk, Point::new2(rho, 0.0), shell, &mut s)
                .map(|p| centered_angle(p.angle()))
        })
        .collect::<Result<_>>()?;
    Ok(ExitCheck {
        rho,
        exits,
        ks: ks_statistic(&angles, |t| poisson_disk_cdf(rho, t)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub m: usize,
    pub n_exits: usize,
    /// `∫ |F_mc − F_exact| dσ`, the L¹ distance of the two densities.
    pub l1: f64,
}

/// Compares the Monte Carlo harmonic density with the exact ball kernel,
/// both on the unit disk and without smoothing.
pub fn harmonic_mc_vs_exact(m: usize, rho: f64, n_exits: usize, seed: u64) -> Result<DensityCheck> {
    let grid = make_grid(2, m)?;
    let smoother = make_bump_kernel(0.05, grid.clone(), Profile::Cosine)?;
    let mc = RuleSet::new(
        HittingRule::HarmonicMc {
            n_exits,
            refresh: 1,
        },
        TransportRule::Origin,
        smoother.clone(),
    )?
    .unsmoothed();
    let exact = RuleSet::new(
        HittingRule::HarmonicExactBall,
        TransportRule::Origin,
        smoother,
    )?
    .unsmoothed();
    let one = RadialField::constant(grid, 1.0);
    let x = Point::new2(rho, 0.0);
    let mut rng = RngStream::new(seed);
    let a = mc.view(&one)?.density(&x, &mut rng)?;
    let b = exact.view(&one)?.density(&x, &mut rng)?;
    let l1 = a.field.zip_map(&b.field, |u, v| (u - v).abs())?.integral();
    Ok(DensityCheck { m, n_exits, l1 })
}
