use std::sync::Arc;

use super::{Point, SphereGrid};
use crate::error::{Error, Result};

/// A real function on the sphere sampled at the nodes of a [`SphereGrid`].
///
/// When it describes a domain boundary, `values[j]` is the radius of the
/// star-shaped domain in direction `grid.node(j)`.
#[derive(Debug, Clone)]
pub struct RadialField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl PartialEq for RadialField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.values == other.values
    }
}

impl RadialField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(
                "values",
                format!("expected {} values, got {}", grid.len(), values.len()),
            ));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Arc<SphereGrid>, f: impl Fn(&Point) -> f64) -> Self {
        let values = grid.nodes().iter().map(f).collect();
        Self { grid, values }
    }

    /// For n=2, build from a function of the polar angle.
    pub fn from_angle_fn(grid: Arc<SphereGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node_angle(j))).collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = j;
            }
        }
        best
    }

    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (j, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = j;
            }
        }
        best
    }

    /// Quadrature integral Σ f_j w_j.
    pub fn integral(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, w)| v * w)
            .sum()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    pub fn leb_volume(&self) -> Result<f64> {
        leb_volume(self)
    }

    pub fn oscillation(&self) -> f64 {
        oscillation(self)
    }

    /// Value at an arbitrary direction: linear interpolation in angle for
    /// n=2, nearest node for n=3.
    pub fn interpolate(&self, dir: &Point) -> f64 {
        match self.grid.dim() {
            2 => {
                let (j, f) = self.grid.locate_angle(dir.angle());
                let k = (j + 1) % self.len();
                self.values[j] * (1.0 - f) + self.values[k] * f
            }
            _ => self.values[self.grid.nearest(dir)],
        }
    }

    /// Radius of the domain boundary along `dir`, where for n=2 the boundary
    /// is the closed polygon through the points `values[j] θ_j`. For n=3
    /// this is the nearest-node value.
    pub fn boundary_radius(&self, dir: &Point) -> f64 {
        match self.grid.dim() {
            2 => {
                let (j, _) = self.grid.locate_angle(dir.angle());
                let k = (j + 1) % self.len();
                let a = self.grid.node(j) * self.values[j];
                let b = self.grid.node(k) * self.values[k];
                let e = b - a;
                let cross =
                    |u: &Point, v: &Point| u.coord(0) * v.coord(1) - u.coord(1) * v.coord(0);
                let den = cross(dir, &e);
                if den.abs() < 1e-300 {
                    self.interpolate(dir)
                } else {
                    cross(&a, &e) / den
                }
            }
            _ => self.values[self.grid.nearest(dir)],
        }
    }

    pub fn ensure_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            Some(index) => Err(Error::NegativeRadius {
                index,
                value: self.values[index],
            }),
            None => Ok(()),
        }
    }
}

/// (Σ |f_j|^p w_j)^{1/p}, or max |f_j| for `p = ∞`.
pub fn lp_norm(f: &RadialField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid(
            "p",
            format!("norm exponent must be >= 1, got {p}"),
        ));
    }
    if p.is_infinite() {
        return Ok(f.values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let w = f.grid.weights();
    let s: f64 = if p == 2.0 {
        f.values.iter().zip(w).map(|(v, w)| v * v * w).sum()
    } else if p == 1.0 {
        f.values.iter().zip(w).map(|(v, w)| v.abs() * w).sum()
    } else {
        f.values
            .iter()
            .zip(w)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum()
    };
    Ok(s.powf(1.0 / p))
}

/// Volume of the star-shaped domain: n^{-1} Σ r_j^n w_j.
pub fn leb_volume(r: &RadialField) -> Result<f64> {
    if let Some(index) = r.values.iter().position(|&v| v < 0.0 || v.is_nan()) {
        return Err(Error::NegativeRadius {
            index,
            value: r.values[index],
        });
    }
    let n = r.dim() as i32;
    let s: f64 = r
        .values
        .iter()
        .zip(r.grid.weights())
        .map(|(v, w)| v.powi(n) * w)
        .sum();
    Ok(s / n as f64)
}

/// max - min over the grid.
pub fn oscillation(r: &RadialField) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    r.max() - r.min()
}
