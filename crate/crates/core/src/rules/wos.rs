//! Walk-on-spheres sampling of Brownian exit points.
//!
//! From the current position jump to a uniform point on the largest sphere
//! that fits inside the domain; stop once within `shell` of the boundary.
//! The exit law equals the harmonic measure up to the shell width.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sphere::{Point, RadialField};

/// Default cap on walk length.
pub const MAX_WALK_STEPS: usize = 1_000_000;

pub trait Boundary {
    fn dim(&self) -> usize;
    /// Distance from an interior point to the boundary (a lower bound is
    /// enough for correctness).
    fn distance(&self, p: &Point) -> f64;
}

/// Centered ball of the given radius.
#[derive(Debug, Clone, Copy)]
pub struct Ball {
    pub radius: f64,
    pub dim: usize,
}

impl Boundary for Ball {
    fn dim(&self) -> usize {
        self.dim
    }

    fn distance(&self, p: &Point) -> f64 {
        self.radius - p.norm()
    }
}

#[derive(Debug, Clone)]
struct Block {
    center: Point,
    radius: f64,
    start: usize,
    end: usize,
}

/// Closed polygon through the points `r_j θ_j` of a planar radial field.
#[derive(Debug, Clone)]
pub struct StarPolygon {
    verts: Vec<Point>,
    blocks: Vec<Block>,
}

const BLOCK: usize = 32;

impl StarPolygon {
    pub fn new(r: &RadialField) -> Result<Self> {
        if r.dim() != 2 {
            return Err(Error::Unsupported("star polygon boundary"));
        }
        let grid = r.grid();
        let m = r.len();
        let verts: Vec<Point> = (0..m).map(|j| grid.node(j) * r.values()[j]).collect();
        let mut blocks = Vec::with_capacity(m.div_ceil(BLOCK));
        let mut start = 0;
        while start < m {
            let end = (start + BLOCK).min(m);
            // segments start..end use vertices start..=end (wrapping)
            let pts: Vec<Point> = (start..=end).map(|i| verts[i % m]).collect();
            let mut c = Point::origin(2);
            for p in &pts {
                c = c + *p;
            }
            let c = c * (1.0 / pts.len() as f64);
            let radius = pts.iter().map(|p| p.distance(&c)).fold(0.0, f64::max);
            blocks.push(Block {
                center: c,
                radius,
                start,
                end,
            });
            start = end;
        }
        Ok(Self { verts, blocks })
    }

    fn segment_distance(&self, i: usize, p: &Point) -> f64 {
        let a = self.verts[i];
        let b = self.verts[(i + 1) % self.verts.len()];
        let ab = b - a;
        let ap = *p - a;
        let len2 = ab.dot(&ab);
        let t = if len2 > 0.0 {
            (ap.dot(&ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (ap - ab * t).norm()
    }
}

impl Boundary for StarPolygon {
    fn dim(&self) -> usize {
        2
    }

    fn distance(&self, p: &Point) -> f64 {
        let mut best_ub = f64::INFINITY;
        for b in &self.blocks {
            best_ub = best_ub.min(p.distance(&b.center) + b.radius);
        }
        let mut best = f64::INFINITY;
        for b in &self.blocks {
            let lb = p.distance(&b.center) - b.radius;
            if lb > best_ub || lb > best {
                continue;
            }
            for i in b.start..b.end {
                best = best.min(self.segment_distance(i, p));
            }
        }
        best
    }
}

fn random_direction(dim: usize, rng: &mut RngStream) -> Point {
    if dim == 2 {
        Point::from_angle(TAU * rng.uniform())
    } else {
        loop {
            let v = Point::new3(
                rng.standard_normal(),
                rng.standard_normal(),
                rng.standard_normal(),
            );
            if let Some(u) = v.normalized() {
                return u;
            }
        }
    }
}

/// Runs one walk from `start` and returns the absorbed position.
pub fn walk_on_spheres<B: Boundary + ?Sized>(
    boundary: &B,
    start: Point,
    shell: f64,
    rng: &mut RngStream,
    max_steps: usize,
) -> Result<Point> {
    let mut x = start;
    for _ in 0..max_steps {
        let d = boundary.distance(&x);
        if d <= shell {
            return Ok(x);
        }
        x = x + random_direction(boundary.dim(), rng) * d;
    }
    Err(Error::WalkDidNotExit(max_steps))
}

/// Exit direction of one walk (radial projection of the absorbed point).
pub fn sample_exit_direction<B: Boundary + ?Sized>(
    boundary: &B,
    start: Point,
    shell: f64,
    rng: &mut RngStream,
) -> Result<Point> {
    let end = walk_on_spheres(boundary, start, shell, rng, MAX_WALK_STEPS)?;
    Ok(end
        .normalized()
        .unwrap_or_else(|| random_direction(boundary.dim(), rng)))
}
