//! Hitting laws `F`, transport rules `H`, the smoothing `r̃ = r ⋆ g`, and the
//! derived quantities `y`, `b` and `η` that drive each jump.

mod config;
mod hitting;
mod transport;
pub mod wos;

use std::sync::{Arc, OnceLock};

use rand::RngCore;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sphere::{spherical_convolve, BumpKernel, Point, RadialField, SphereGrid};

pub use config::{RuleConfig, SmootherConfig, DEFAULT_SMOOTHER_ETA};
pub use hitting::{sample_from_density, HittingRule, MIN_EXITS};
pub use transport::{Alpha, AxisNorm, TransportRule, Transported, CLAMP_FRACTION};
use wos::{Ball, Boundary, StarPolygon};

/// Required radial distance between an interior point and the smoothed
/// boundary, relative to `max r̃`.
pub const INTERIOR_MARGIN: f64 = 1e-6;

/// Walk-on-spheres absorption shell relative to `max r̃`.
pub const WOS_SHELL: f64 = 1e-6;

/// A complete model: hitting law, transport rule and smoother.
#[derive(Debug, Clone)]
pub struct RuleSet {
    pub hitting: HittingRule,
    pub transport: TransportRule,
    smoother: BumpKernel,
    force_unsmoothed: bool,
}

impl RuleSet {
    pub fn new(
        hitting: HittingRule,
        transport: TransportRule,
        smoother: BumpKernel,
    ) -> Result<Self> {
        hitting.validate()?;
        transport.validate()?;
        if matches!(hitting, HittingRule::HarmonicMc { .. }) && smoother.grid().dim() != 2 {
            return Err(Error::Unsupported(
                "Monte Carlo harmonic measure in three dimensions",
            ));
        }
        Ok(Self {
            hitting,
            transport,
            smoother,
            force_unsmoothed: false,
        })
    }

    /// Uses `r̃ = r` instead of the convolution.
    pub fn unsmoothed(mut self) -> Self {
        self.force_unsmoothed = true;
        self
    }

    pub fn is_unsmoothed(&self) -> bool {
        self.force_unsmoothed
    }

    pub fn smoother(&self) -> &BumpKernel {
        &self.smoother
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.smoother.grid()
    }

    /// Scale invariance of the pair `(F, H)` as implied by the variants.
    pub fn is_scale_invariant(&self) -> bool {
        self.hitting.is_scale_invariant() && self.transport.is_scale_covariant()
    }

    /// Binds the rules to a domain. Smoothed quantities are computed lazily.
    pub fn view<'a>(&'a self, r: &'a RadialField) -> Result<DomainView<'a>> {
        self.grid().ensure_same(r.grid())?;
        r.ensure_positive()?;
        Ok(DomainView {
            rules: self,
            r,
            smooth: OnceLock::new(),
            polygon: OnceLock::new(),
        })
    }
}

/// A hitting density together with its normalization factor `y`.
#[derive(Debug, Clone)]
pub struct Density {
    pub field: RadialField,
    pub y: f64,
    /// Monte Carlo estimate from fewer than [`MIN_EXITS`] exits.
    pub undersampled: bool,
}

impl Density {
    /// `b = ω_n F / y`.
    pub fn drift(&self) -> RadialField {
        let omega = self.field.grid().area();
        self.field.map(|p| omega * p / self.y)
    }
}

/// Rules evaluated against one domain `r`.
pub struct DomainView<'a> {
    rules: &'a RuleSet,
    r: &'a RadialField,
    smooth: OnceLock<RadialField>,
    polygon: OnceLock<StarPolygon>,
}

impl<'a> DomainView<'a> {
    pub fn rules(&self) -> &RuleSet {
        self.rules
    }

    pub fn raw(&self) -> &RadialField {
        self.r
    }

    /// `r̃ = r ⋆ g` (or `r` itself for unsmoothed rule sets).
    pub fn smoothed(&self) -> &RadialField {
        if self.rules.force_unsmoothed {
            return self.r;
        }
        self.smooth.get_or_init(|| {
            spherical_convolve(self.r, &self.rules.smoother)
                .expect("grids were checked when the view was built")
        })
    }

    fn polygon(&self) -> Result<&StarPolygon> {
        if let Some(p) = self.polygon.get() {
            return Ok(p);
        }
        let p = StarPolygon::new(self.smoothed())?;
        Ok(self.polygon.get_or_init(|| p))
    }

    /// Radial distance from `x` to the smoothed boundary along `x/|x|`.
    pub fn interior_margin(&self, x: &Point) -> f64 {
        let s = self.smoothed();
        match x.normalized() {
            Some(dir) => s.boundary_radius(&dir) - x.norm(),
            None => {
                if s.dim() == 2 {
                    s.min() * (0.5 * s.grid().spacing()).cos()
                } else {
                    s.min()
                }
            }
        }
    }

    fn check_interior(&self, x: &Point) -> Result<()> {
        let required = INTERIOR_MARGIN * self.smoothed().max();
        let margin = self.interior_margin(x);
        if margin >= required {
            Ok(())
        } else {
            Err(Error::DomainViolation { margin, required })
        }
    }

    fn ball_radius(&self) -> Result<f64> {
        let s = self.smoothed();
        let (lo, hi) = (s.min(), s.max());
        let rel = (hi - lo) / hi;
        if rel > 1e-9 {
            return Err(Error::NotABall(rel));
        }
        Ok(s.integral() / s.grid().area())
    }

    /// Hitting density `F(r, x, ·)` on the grid and `y_{r,x}`.
    ///
    /// For Monte Carlo rules a fresh batch of exits is simulated from a
    /// substream seeded by one draw of `rng`.
    pub fn density(&self, x: &Point, rng: &mut RngStream) -> Result<Density> {
        if x.dim() != self.r.dim() {
            return Err(Error::invalid("x", "dimension differs from the grid"));
        }
        if self.rules.hitting.needs_interior() {
            self.check_interior(x)?;
        }
        let grid = self.r.grid().clone();
        let field = match &self.rules.hitting {
            HittingRule::Uniform => RadialField::constant(grid.clone(), 1.0 / grid.area()),
            HittingRule::BoundaryProportional => hitting::normalize(self.r.clone())?,
            HittingRule::DistancePower { beta } => {
                let w = hitting::distance_weights(self.smoothed(), x, |d| hitting::power(d, *beta));
                hitting::normalize(RadialField::new(grid, w)?)?
            }
            HittingRule::DistanceTable { distances, values } => {
                let w = hitting::distance_weights(self.smoothed(), x, |d| {
                    hitting::table_eval(distances, values, d)
                });
                hitting::normalize(RadialField::new(grid, w)?)?
            }
            HittingRule::HarmonicExactBall => {
                let radius = self.ball_radius()?;
                let w = hitting::ball_poisson_weights(radius, x, &grid);
                hitting::normalize(RadialField::new(grid, w)?)?
            }
            HittingRule::HarmonicMc { n_exits, .. } => {
                let n_exits = *n_exits;
                let exits = self.exit_batch(x, n_exits, rng)?;
                let m = grid.len();
                let mut counts = vec![0.0; m];
                let n = grid.dim() as i32;
                let mut ysum = 0.0;
                for xi in &exits {
                    let j = grid.nearest(xi);
                    counts[j] += 1.0;
                    ysum += self.r.interpolate(xi).powi(n - 1);
                }
                let binned = RadialField::new(
                    grid.clone(),
                    counts
                        .iter()
                        .enumerate()
                        .map(|(j, c)| c / (n_exits as f64 * grid.weight(j)))
                        .collect(),
                )?;
                let field = hitting::normalize(spherical_convolve(&binned, &self.rules.smoother)?)?;
                let y = grid.area() * ysum / n_exits as f64;
                return Ok(Density {
                    field,
                    y: check_y(y)?,
                    undersampled: n_exits < MIN_EXITS,
                });
            }
        };
        let y = y_factor(self.r, &field)?;
        Ok(Density {
            field,
            y,
            undersampled: false,
        })
    }

    /// Draws `ξ ~ F(r, x, ·)`. Exact rules invert `density`; Monte Carlo
    /// rules run one fresh walk and ignore it.
    pub fn sample(&self, x: &Point, density: &Density, rng: &mut RngStream) -> Result<Point> {
        match self.rules.hitting {
            HittingRule::HarmonicMc { .. } => self.walk(x, rng),
            _ => Ok(sample_from_density(&density.field, rng)),
        }
    }

    /// Density and one draw from it.
    pub fn sample_angle(&self, x: &Point, rng: &mut RngStream) -> Result<Point> {
        if let HittingRule::HarmonicMc { .. } = self.rules.hitting {
            self.check_interior(x)?;
            return self.walk(x, rng);
        }
        let d = self.density(x, rng)?;
        self.sample(x, &d, rng)
    }

    fn walk(&self, x: &Point, rng: &mut RngStream) -> Result<Point> {
        let shell = WOS_SHELL * self.smoothed().max();
        match self.rules.hitting {
            HittingRule::HarmonicExactBall => {
                let ball = Ball {
                    radius: self.ball_radius()?,
                    dim: x.dim(),
                };
                wos::sample_exit_direction(&ball, *x, shell, rng)
            }
            _ => wos::sample_exit_direction(self.polygon()?, *x, shell, rng),
        }
    }

    /// `count` independent exit directions from `x`, simulated in parallel
    /// on substreams derived from one draw of `rng`.
    pub fn exit_batch(&self, x: &Point, count: usize, rng: &mut RngStream) -> Result<Vec<Point>> {
        self.check_interior(x)?;
        let base = RngStream::new(rng.next_u64());
        let shell = WOS_SHELL * self.smoothed().max();
        let boundary: &(dyn Boundary + Sync) = self.polygon()?;
        (0..count)
            .into_par_iter()
            .map(|k| {
                let mut s = base.substream("exit", k as u64);
                wos::sample_exit_direction(boundary, *x, shell, &mut s)
            })
            .collect()
    }

    /// `∫ r̃(z) z dσ(z)`.
    pub fn statistical_center(&self) -> Point {
        let s = self.smoothed();
        let grid = s.grid();
        let mut c = Point::origin(grid.dim());
        for (j, v) in s.values().iter().enumerate() {
            c = c + grid.node(j) * (v * grid.weight(j));
        }
        c
    }

    /// `H(r, ξ)`, clamped into the smoothed domain where needed.
    pub fn transport(&self, xi: &Point) -> Result<Transported> {
        if (xi.norm() - 1.0).abs() > 1e-9 || xi.dim() != self.r.dim() {
            return Err(Error::invalid(
                "xi",
                "must be a unit vector of the grid dimension",
            ));
        }
        if let TransportRule::Origin = self.rules.transport {
            return Ok(Transported {
                point: Point::origin(xi.dim()),
                clamped: false,
                outside: false,
            });
        }
        let s = self.smoothed();
        let ell = s.interpolate(xi);
        let raw = self
            .rules
            .transport
            .raw_point(xi, ell, || self.statistical_center());
        let norm = raw.norm();
        let Some(dir) = raw.normalized() else {
            return Ok(Transported {
                point: raw,
                clamped: false,
                outside: false,
            });
        };
        let limit = s.boundary_radius(&dir);
        if let TransportRule::StatisticalCenter = self.rules.transport {
            return Ok(Transported {
                point: raw,
                clamped: false,
                outside: norm >= limit,
            });
        }
        let cap = CLAMP_FRACTION * limit;
        if norm > cap {
            Ok(Transported {
                point: dir * cap,
                clamped: true,
                outside: false,
            })
        } else {
            Ok(Transported {
                point: raw,
                clamped: false,
                outside: false,
            })
        }
    }
}

fn check_y(y: f64) -> Result<f64> {
    if y < 1e-12 || !y.is_finite() {
        Err(Error::DegenerateDomain(y))
    } else {
        Ok(y)
    }
}

/// `r̃ = r ⋆ g`.
pub fn smooth(r: &RadialField, g: &BumpKernel) -> Result<RadialField> {
    r.ensure_positive()?;
    spherical_convolve(r, g)
}

/// `y = ω_n Σ r_j^{n-1} F_j w_j`.
pub fn y_factor(r: &RadialField, density: &RadialField) -> Result<f64> {
    r.grid().ensure_same(density.grid())?;
    let grid = r.grid();
    let n = grid.dim() as i32;
    let s: f64 = r
        .values()
        .iter()
        .zip(density.values())
        .zip(grid.weights())
        .map(|((rv, p), w)| rv.powi(n - 1) * p * w)
        .sum();
    check_y(grid.area() * s)
}

/// `b = ω_n F / y`.
pub fn drift_b(r: &RadialField, density: &RadialField) -> Result<RadialField> {
    let y = y_factor(r, density)?;
    let omega = r.grid().area();
    Ok(density.map(|p| omega * p / y))
}

/// `η = ε^{1/n} y^{-1/(n-1)}`, checked against the grid resolution guard.
pub fn bump_scale(eps: f64, y: f64, grid: &SphereGrid) -> Result<f64> {
    if !(eps > 0.0) || !(y > 0.0) {
        return Err(Error::invalid("eps", "jump volume and y must be positive"));
    }
    let n = grid.dim() as f64;
    let eta = eps.powf(1.0 / n) * y.powf(-1.0 / (n - 1.0));
    if !(eta <= 1.0) {
        return Err(Error::invalid(
            "eps",
            format!("bump scale {eta} exceeds 1; use a smaller jump volume"),
        ));
    }
    if !crate::sphere::is_resolved(eta, grid) {
        return Err(Error::UnderResolved {
            eta,
            spacing: grid.spacing(),
        });
    }
    Ok(eta)
}

/// Free-function form of [`DomainView::density`].
pub fn eval_density(
    rules: &RuleSet,
    r: &RadialField,
    x: &Point,
    rng: &mut RngStream,
) -> Result<Density> {
    rules.view(r)?.density(x, rng)
}

/// Free-function form of [`DomainView::sample_angle`].
pub fn sample_angle(
    rules: &RuleSet,
    r: &RadialField,
    x: &Point,
    rng: &mut RngStream,
) -> Result<Point> {
    rules.view(r)?.sample_angle(x, rng)
}

/// Free-function form of [`DomainView::transport`].
pub fn transport(rules: &RuleSet, r: &RadialField, xi: &Point) -> Result<Transported> {
    rules.view(r)?.transport(xi)
}

/// Largest deviations seen when comparing `(r, x)` with `(cr, cx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleProbe {
    /// max_j |F(cr, cx)_j − F(r, x)_j| / max_j F(r, x)_j
    pub density: f64,
    /// |y(cr, cx) − c^{n-1} y(r, x)| / (c^{n-1} y(r, x))
    pub y: f64,
    /// max over probe directions of |H(cr, ξ) − c H(r, ξ)|
    pub transport: f64,
}

/// Numerical check of scale invariance at one `(r, x, c)`. Only exact
/// hitting densities can be compared node-wise.
pub fn probe_scale_invariance(
    rules: &RuleSet,
    r: &RadialField,
    x: &Point,
    c: f64,
) -> Result<ScaleProbe> {
    if !rules.hitting.is_exact() {
        return Err(Error::Unsupported(
            "node-wise scale probe of a Monte Carlo density",
        ));
    }
    let cr = r.scaled(c);
    let cx = *x * c;
    let (v1, v2) = (rules.view(r)?, rules.view(&cr)?);
    let mut rng = RngStream::new(0);
    let d1 = v1.density(x, &mut rng)?;
    let d2 = v2.density(&cx, &mut rng)?;
    let scale = d1.field.max();
    let density = d1
        .field
        .values()
        .iter()
        .zip(d2.field.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale;
    let cy = c.powi(r.dim() as i32 - 1) * d1.y;
    let y = (d2.y - cy).abs() / cy;
    let grid = r.grid();
    let mut transport: f64 = 0.0;
    for k in 0..16 {
        let xi = grid.node(k * grid.len() / 16);
        let h1 = v1.transport(&xi)?.point * c;
        let h2 = v2.transport(&xi)?.point;
        transport = transport.max(h1.distance(&h2));
    }
    Ok(ScaleProbe {
        density,
        y,
        transport,
    })
}
