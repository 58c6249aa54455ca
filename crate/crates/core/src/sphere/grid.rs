use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use statrs::function::gamma::gamma;

use super::Point;
use crate::error::{Error, Result};

/// Smallest node count accepted by [`SphereGrid::new`].
pub const MIN_NODES: usize = 4;

/// Surface area of the unit sphere S^{n-1}: 2π^{n/2}/Γ(n/2).
pub fn surface_area(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// Quadrature grid on S^{n-1}.
///
/// For n=2 the nodes are equispaced angles `2πj/M` with weights `2π/M`.
/// For n=3 the nodes follow a Fibonacci (golden-spiral) layout, which is
/// equal-area by construction, so every node carries weight `4π/M`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    dim: usize,
    nodes: Vec<Point>,
    weights: Vec<f64>,
    area: f64,
}

impl PartialEq for SphereGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.nodes.len() == other.nodes.len()
    }
}

impl SphereGrid {
    pub fn new(n: usize, m: usize) -> Result<Arc<Self>> {
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if m < MIN_NODES {
            return Err(Error::GridTooSmall {
                got: m,
                min: MIN_NODES,
            });
        }
        let area = surface_area(n);
        let nodes: Vec<Point> = match n {
            2 => (0..m)
                .map(|j| Point::from_angle(TAU * j as f64 / m as f64))
                .collect(),
            _ => {
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..m)
                    .map(|j| {
                        let z = 1.0 - (2.0 * j as f64 + 1.0) / m as f64;
                        let rho = (1.0 - z * z).max(0.0).sqrt();
                        let (s, c) = (golden * j as f64).sin_cos();
                        Point::new3(rho * c, rho * s, z)
                    })
                    .collect()
            }
        };
        let weights = vec![area / m as f64; m];
        Ok(Arc::new(Self {
            dim: n,
            nodes,
            weights,
            area,
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ω_n, the total quadrature mass.
    #[inline]
    pub fn area(&self) -> f64 {
        self.area
    }

    #[inline]
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    #[inline]
    pub fn node(&self, j: usize) -> Point {
        self.nodes[j]
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    /// Typical distance between neighbouring nodes.
    pub fn spacing(&self) -> f64 {
        match self.dim {
            2 => TAU / self.len() as f64,
            _ => (self.area / self.len() as f64).sqrt(),
        }
    }

    /// Angle of node `j` (n=2); polar angle from the north pole (n=3).
    pub fn node_angle(&self, j: usize) -> f64 {
        match self.dim {
            2 => TAU * j as f64 / self.len() as f64,
            _ => self.nodes[j].coord(2).clamp(-1.0, 1.0).acos(),
        }
    }

    /// For n=2: the cell `[θ_j, θ_{j+1})` containing the direction and the
    /// fractional position inside it.
    pub fn locate_angle(&self, angle: f64) -> (usize, f64) {
        let m = self.len();
        let s = angle.rem_euclid(TAU) / TAU * m as f64;
        let j = (s.floor() as usize).min(m - 1);
        (j, (s - j as f64).clamp(0.0, 1.0))
    }

    /// Node closest to a unit direction.
    pub fn nearest(&self, dir: &Point) -> usize {
        match self.dim {
            2 => {
                let (j, f) = self.locate_angle(dir.angle());
                if f < 0.5 {
                    j
                } else {
                    (j + 1) % self.len()
                }
            }
            _ => {
                let mut best = 0;
                let mut best_dot = f64::NEG_INFINITY;
                for (j, p) in self.nodes.iter().enumerate() {
                    let d = p.dot(dir);
                    if d > best_dot {
                        best_dot = d;
                        best = j;
                    }
                }
                best
            }
        }
    }

    /// Indices of nodes `θ` with `⟨dir, θ⟩ ≥ min_dot`.
    pub fn cap_indices(&self, dir: &Point, min_dot: f64) -> Vec<usize> {
        match self.dim {
            2 => {
                let m = self.len();
                let half = min_dot.clamp(-1.0, 1.0).acos();
                if half >= PI {
                    return (0..m).collect();
                }
                let (j, _) = self.locate_angle(dir.angle());
                let reach = (half / self.spacing()).ceil() as usize + 1;
                if 2 * reach + 2 >= m {
                    return (0..m)
                        .filter(|&k| self.nodes[k].dot(dir) >= min_dot)
                        .collect();
                }
                (0..=2 * reach + 1)
                    .map(|o| (j + m + o - reach) % m)
                    .filter(|&k| self.nodes[k].dot(dir) >= min_dot)
                    .collect()
            }
            _ => (0..self.len())
                .filter(|&k| self.nodes[k].dot(dir) >= min_dot)
                .collect(),
        }
    }

    pub(crate) fn ensure_same(&self, other: &SphereGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left_n: self.dim,
                left_m: self.len(),
                right_n: other.dim,
                right_m: other.len(),
            })
        }
    }
}

/// Build the quadrature grid for S^{n-1} with `m` nodes.
pub fn make_grid(n: usize, m: usize) -> Result<Arc<SphereGrid>> {
    SphereGrid::new(n, m)
}
