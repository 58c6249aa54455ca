use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sphere::{Point, RadialField};

/// Law `F(r, x, ·)` of the boundary direction hit by the particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HittingRule {
    /// Constant density `1/ω_n`.
    Uniform,
    /// Density proportional to the (unsmoothed) radius, `r / ∫ r dσ`.
    BoundaryProportional,
    /// Density proportional to `|r̃(θ)θ − x|^β`.
    DistancePower { beta: f64 },
    /// Density proportional to `φ(|r̃(θ)θ − x|)` for a tabulated positive
    /// `φ`, interpolated linearly and held constant outside the table.
    DistanceTable {
        distances: Vec<f64>,
        values: Vec<f64>,
    },
    /// Exact Poisson kernel of a centered ball; `r̃` must be constant.
    HarmonicExactBall,
    /// Harmonic measure of the smoothed domain estimated by walk-on-spheres.
    HarmonicMc {
        n_exits: usize,
        #[serde(default = "default_refresh")]
        refresh: usize,
    },
}

fn default_refresh() -> usize {
    1
}

/// Below this many exits a Monte Carlo density is flagged as under-sampled.
pub const MIN_EXITS: usize = 1000;

impl HittingRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            HittingRule::DistancePower { beta } if !beta.is_finite() => {
                Err(Error::invalid("beta", "must be finite"))
            }
            HittingRule::DistanceTable { distances, values } => {
                if distances.is_empty() || distances.len() != values.len() {
                    return Err(Error::invalid(
                        "distances",
                        "table columns must be non-empty and of equal length",
                    ));
                }
                if distances.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::invalid("distances", "must be strictly increasing"));
                }
                if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::invalid("values", "must be finite and positive"));
                }
                Ok(())
            }
            HittingRule::HarmonicMc { n_exits, refresh } => {
                if *n_exits == 0 {
                    return Err(Error::invalid("n_exits", "must be positive"));
                }
                if *refresh == 0 {
                    return Err(Error::invalid("refresh", "must be positive"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Whether `F(cr, cx, ·) = F(r, x, ·)` holds for every `c > 0`.
    pub fn is_scale_invariant(&self) -> bool {
        !matches!(self, HittingRule::DistanceTable { .. })
    }

    /// Whether the density is computed exactly (as opposed to sampled).
    pub fn is_exact(&self) -> bool {
        !matches!(self, HittingRule::HarmonicMc { .. })
    }

    /// Whether `x` must lie strictly inside the smoothed domain.
    pub fn needs_interior(&self) -> bool {
        matches!(
            self,
            HittingRule::DistancePower { .. }
                | HittingRule::DistanceTable { .. }
                | HittingRule::HarmonicExactBall
                | HittingRule::HarmonicMc { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            HittingRule::Uniform => "uniform",
            HittingRule::BoundaryProportional => "boundary-proportional",
            HittingRule::DistancePower { .. } => "distance-power",
            HittingRule::DistanceTable { .. } => "distance-table",
            HittingRule::HarmonicExactBall => "harmonic-exact-ball",
            HittingRule::HarmonicMc { .. } => "harmonic-mc",
        }
    }
}

pub(crate) fn power(d: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        1.0
    } else if beta == -1.0 {
        1.0 / d
    } else if beta == 1.0 {
        d
    } else {
        d.powf(beta)
    }
}

pub(crate) fn table_eval(distances: &[f64], values: &[f64], d: f64) -> f64 {
    let k = distances.partition_point(|&t| t <= d);
    if k == 0 {
        values[0]
    } else if k == distances.len() {
        values[k - 1]
    } else {
        let (a, b) = (distances[k - 1], distances[k]);
        let f = (d - a) / (b - a);
        values[k - 1] * (1.0 - f) + values[k] * f
    }
}

/// Unnormalized values `φ(|r̃_j θ_j − x|)`.
pub(crate) fn distance_weights(
    smooth: &RadialField,
    x: &Point,
    phi: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let grid = smooth.grid();
    smooth
        .values()
        .iter()
        .enumerate()
        .map(|(j, &s)| phi((grid.node(j) * s).distance(x)))
        .collect()
}

/// Unnormalized Poisson kernel of the ball of radius `radius` at `x`.
pub(crate) fn ball_poisson_weights(
    radius: f64,
    x: &Point,
    grid: &crate::sphere::SphereGrid,
) -> Vec<f64> {
    let n = grid.dim() as i32;
    let num = radius * radius - x.dot(x);
    grid.nodes()
        .iter()
        .map(|theta| num / (*theta * radius).distance(x).powi(n))
        .collect()
}

/// Rescales nodal values so their quadrature sum is 1.
pub(crate) fn normalize(mut field: RadialField) -> Result<RadialField> {
    let total = field.integral();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateDomain(total));
    }
    for v in field.values_mut() {
        *v /= total;
    }
    Ok(field)
}

/// Draws a direction from a nodal density.
///
/// For n=2 the density is taken piecewise linear between nodes and
/// inverted exactly within the selected cell; for n=3 a node is drawn
/// with probability proportional to `p_j w_j`.
pub fn sample_from_density(density: &RadialField, rng: &mut RngStream) -> Point {
    let grid = density.grid();
    let p = density.values();
    let m = p.len();
    if grid.dim() == 2 {
        let dtheta = grid.spacing();
        let cell = |j: usize| 0.5 * (p[j] + p[(j + 1) % m]) * dtheta;
        let total: f64 = (0..m).map(cell).sum();
        let mut target = rng.uniform() * total;
        let mut j = 0;
        while j + 1 < m {
            let c = cell(j);
            if target < c {
                break;
            }
            target -= c;
            j += 1;
        }
        let a = p[j];
        let b = p[(j + 1) % m];
        let t = (target / dtheta).max(0.0);
        // solve a f + (b - a) f² / 2 = t for f in [0, 1]
        let disc = (a * a + 2.0 * (b - a) * t).max(0.0);
        let denom = a + disc.sqrt();
        let f = if denom > 0.0 {
            (2.0 * t / denom).clamp(0.0, 1.0)
        } else {
            0.5
        };
        Point::from_angle((j as f64 + f) * dtheta)
    } else {
        let w = grid.weights();
        let total: f64 = p.iter().zip(w).map(|(a, b)| a * b).sum();
        let mut target = rng.uniform() * total;
        for j in 0..m {
            let c = p[j] * w[j];
            if target < c {
                return grid.node(j);
            }
            target -= c;
        }
        grid.node(m - 1)
    }
}
