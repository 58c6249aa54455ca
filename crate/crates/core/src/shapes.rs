//! Named initial domains.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::{RadialField, SphereGrid};

/// A radial profile given by name and parameters.
///
/// In three dimensions the angle used by `sunflower` and `ellipse` is the
/// azimuth around the third axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ShapeSpec {
    /// `r ≡ radius`.
    Ball {
        #[serde(default = "one")]
        radius: f64,
    },
    /// `r(θ) = 1 + amp cos(kθ)`.
    Sunflower { k: u32, amp: f64 },
    /// `r(θ) = 1 / sqrt(cos²θ + b² sin²θ)`, the ellipse with semi-axes 1 and `1/b`.
    Ellipse { b: f64 },
    /// `r(θ) = a0 + Σ_k (cos[k] cos(kθ) + sin[k] sin(kθ))`, k starting at 1.
    Fourier {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl Default for ShapeSpec {
    fn default() -> Self {
        ShapeSpec::Ball { radius: 1.0 }
    }
}

impl ShapeSpec {
    pub fn sunflower() -> Self {
        ShapeSpec::Sunflower { k: 6, amp: 0.3 }
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            ShapeSpec::Ball { radius } => *radius,
            ShapeSpec::Sunflower { k, amp } => 1.0 + amp * (*k as f64 * theta).cos(),
            ShapeSpec::Ellipse { b } => {
                1.0 / (theta.cos().powi(2) + b * b * theta.sin().powi(2)).sqrt()
            }
            ShapeSpec::Fourier { a0, cos, sin } => {
                let mut v = *a0;
                for (k, c) in cos.iter().enumerate() {
                    v += c * ((k + 1) as f64 * theta).cos();
                }
                for (k, s) in sin.iter().enumerate() {
                    v += s * ((k + 1) as f64 * theta).sin();
                }
                v
            }
        }
    }

    /// Samples the profile on `grid`; fails unless it is strictly positive.
    pub fn build(&self, grid: Arc<SphereGrid>) -> Result<RadialField> {
        let r = RadialField::from_fn(grid, |p| {
            let theta = p.coord(1).atan2(p.coord(0));
            self.eval(theta)
        });
        r.ensure_positive()?;
        Ok(r)
    }

    /// Like [`build`](Self::build), rescaled to enclose volume `leb`.
    pub fn build_with_volume(&self, grid: Arc<SphereGrid>, leb: f64) -> Result<RadialField> {
        if !(leb > 0.0) {
            return Err(Error::invalid("leb", "must be positive"));
        }
        let r = self.build(grid)?;
        let n = r.dim() as f64;
        let c = (leb / r.leb_volume()?).powf(1.0 / n);
        Ok(r.scaled(c))
    }
}

/// Radius of the ball of unit volume in dimension `n`.
pub fn unit_volume_radius(n: usize) -> f64 {
    match n {
        2 => 1.0 / PI.sqrt(),
        _ => (3.0 / (4.0 * PI)).cbrt(),
    }
}
