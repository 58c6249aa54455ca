use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::grid::surface_area;
use super::{Point, RadialField, SphereGrid};
use crate::error::{Error, Result};

/// Profile φ on [-1, 1] that shapes a bump: continuous, nonnegative, sup 1.
#[derive(Clone, Default)]
pub enum Profile {
    /// (1 + cos πs)/2.
    #[default]
    Cosine,
    /// Any user profile; validated on construction of a kernel.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Cosine => f.write_str("Cosine"),
            Profile::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl Profile {
    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        if !(-1.0..=1.0).contains(&s) {
            return 0.0;
        }
        match self {
            Profile::Cosine => 0.5 * (1.0 + (std::f64::consts::PI * s).cos()),
            Profile::Custom(f) => f(s),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Profile::Custom(_) = self {
            let mut sup: f64 = 0.0;
            for i in 0..=2000 {
                let v = self.eval(-1.0 + i as f64 / 1000.0);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::invalid(
                        "phi",
                        "profile must be finite and nonnegative",
                    ));
                }
                sup = sup.max(v);
            }
            if (sup - 1.0).abs() > 1e-3 {
                return Err(Error::invalid(
                    "phi",
                    format!("profile sup must be 1, got {sup}"),
                ));
            }
        }
        Ok(())
    }
}

struct Spectrum {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    eigen: Vec<f64>,
}

/// Local spherical approximate identity g_η.
///
/// `g_η(t) = c_η/ω_{n-1} · η^{-(n-1)} · φ(1 - (1-t)/η²)`, supported on
/// `t ≥ 1 - 2η²` (a cap of chord radius 2η). `c_η` is fixed by the grid
/// quadrature so that `1 ⋆ g_η = 1` holds at the nodes (exactly for n=2,
/// to quadrature accuracy on the Fibonacci grid for n=3).
#[derive(Clone)]
pub struct BumpKernel {
    grid: Arc<SphereGrid>,
    eta: f64,
    profile: Profile,
    c_eta: f64,
    amplitude: f64,
    min_dot: f64,
    // n=2: c_o = g(cos(oΔ)) w / ω for o = 0..=band
    band: Vec<f64>,
    spectrum: Arc<OnceLock<Spectrum>>,
}

impl fmt::Debug for BumpKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BumpKernel")
            .field("n", &self.grid.dim())
            .field("m", &self.grid.len())
            .field("eta", &self.eta)
            .field("c_eta", &self.c_eta)
            .field("profile", &self.profile)
            .finish()
    }
}

impl BumpKernel {
    pub fn new(eta: f64, grid: Arc<SphereGrid>, profile: Profile) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::invalid(
                "eta",
                format!("must lie in (0, 1], got {eta}"),
            ));
        }
        check_resolution(eta, &grid)?;
        profile.validate()?;
        let n = grid.dim();
        let omega = grid.area();
        let base = eta.powi(-(n as i32 - 1)) / surface_area(n - 1);
        let min_dot = 1.0 - 2.0 * eta * eta;
        let raw = |t: f64| -> f64 {
            if t < min_dot {
                0.0
            } else {
                base * profile.eval(1.0 - (1.0 - t) / (eta * eta))
            }
        };

        let mut band = Vec::new();
        let mass = match n {
            2 => {
                let m = grid.len();
                let dtheta = grid.spacing();
                let w = grid.weight(0);
                let mut o = 0usize;
                while o <= m / 2 {
                    let t = (o as f64 * dtheta).cos();
                    if t < min_dot {
                        break;
                    }
                    band.push(raw(t) * w / omega);
                    o += 1;
                }
                // wrap-around copies of offsets when the cap reaches past half the circle
                let mut s = 0.0;
                for k in 0..m {
                    let off = k.min(m - k);
                    if off < band.len() {
                        s += band[off];
                    }
                }
                s
            }
            _ => {
                let m = grid.len();
                let samples = m.min(64);
                let mut acc = 0.0;
                for i in 0..samples {
                    let z = grid.node(i * m / samples);
                    let s: f64 = grid
                        .cap_indices(&z, min_dot)
                        .into_iter()
                        .map(|k| raw(z.dot(&grid.node(k))) * grid.weight(k))
                        .sum();
                    acc += s / omega;
                }
                acc / samples as f64
            }
        };
        if !(mass > 0.0) {
            return Err(Error::UnderResolved {
                eta,
                spacing: grid.spacing(),
            });
        }
        let c_eta = 1.0 / mass;
        for c in &mut band {
            *c *= c_eta;
        }
        Ok(Self {
            grid,
            eta,
            profile,
            c_eta,
            amplitude: base * c_eta,
            min_dot,
            band,
            spectrum: Arc::new(OnceLock::new()),
        })
    }

    #[inline]
    pub fn eta(&self) -> f64 {
        self.eta
    }

    #[inline]
    pub fn c_eta(&self) -> f64 {
        self.c_eta
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Smallest `t = ⟨z, θ⟩` in the support, `1 - 2η²`.
    pub fn support_min_dot(&self) -> f64 {
        self.min_dot
    }

    /// g_η(t).
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.min_dot {
            0.0
        } else {
            self.amplitude * self.profile.eval(1.0 - (1.0 - t) / (self.eta * self.eta))
        }
    }

    /// max g_η = g_η(1).
    pub fn sup(&self) -> f64 {
        self.amplitude
    }

    /// Continuum normalization constant from the closed-form integral,
    /// `c_η^{-1} = 2^{n-2}/ω_n ∫_0^1 φ(1-2s) s^{(n-3)/2} (1-η²s)^{(n-3)/2} ds`.
    pub fn continuum_c_eta(&self) -> f64 {
        continuum_c_eta(self.eta, self.grid.dim(), &self.profile)
    }

    fn spectrum(&self) -> &Spectrum {
        self.spectrum.get_or_init(|| {
            let m = self.grid.len();
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(m);
            let inverse = planner.plan_fft_inverse(m);
            let mut col: Vec<Complex<f64>> = (0..m)
                .map(|k| {
                    let off = k.min(m - k);
                    Complex::new(self.band.get(off).copied().unwrap_or(0.0), 0.0)
                })
                .collect();
            forward.process(&mut col);
            Spectrum {
                forward,
                inverse,
                eigen: col.into_iter().map(|c| c.re).collect(),
            }
        })
    }

    /// Adds `amplitude · g_η(⟨ξ, ·⟩)` to `r` in place and returns the
    /// resulting change of enclosed volume (same quadrature as
    /// [`leb_volume`](super::leb_volume)).
    pub fn deposit(&self, r: &mut RadialField, xi: &Point, amplitude: f64) -> Result<f64> {
        self.grid.ensure_same(r.grid())?;
        if !(amplitude >= 0.0) {
            return Err(Error::invalid(
                "amplitude",
                format!("must be >= 0, got {amplitude}"),
            ));
        }
        if (xi.norm() - 1.0).abs() > 1e-9 || xi.dim() != self.grid.dim() {
            return Err(Error::invalid(
                "xi",
                "must be a unit vector of the grid dimension",
            ));
        }
        let n = self.grid.dim() as i32;
        let mut dleb = 0.0;
        for k in self.grid.cap_indices(xi, self.min_dot) {
            let g = self.eval(xi.dot(&self.grid.node(k)));
            if g > 0.0 {
                let old = r.values()[k];
                let new = old + amplitude * g;
                r.values_mut()[k] = new;
                dleb += (new.powi(n) - old.powi(n)) * self.grid.weight(k);
            }
        }
        Ok(dleb / n as f64)
    }
}

fn check_resolution(eta: f64, grid: &SphereGrid) -> Result<()> {
    let spacing = grid.spacing();
    if spacing > eta / 3.0 {
        Err(Error::UnderResolved { eta, spacing })
    } else {
        Ok(())
    }
}

/// Whether a bump of scale `eta` passes the grid resolution guard.
pub fn is_resolved(eta: f64, grid: &SphereGrid) -> bool {
    check_resolution(eta, grid).is_ok()
}

pub fn continuum_c_eta(eta: f64, n: usize, profile: &Profile) -> f64 {
    // s = u² removes the s^{-1/2} endpoint singularity at n = 2
    let e = (n as f64 - 3.0) / 2.0;
    let f = |u: f64| {
        let s = u * u;
        2.0 * profile.eval(1.0 - 2.0 * s) * u.powi(n as i32 - 2) * (1.0 - eta * eta * s).powf(e)
    };
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let mut acc = f(0.0) + f(1.0);
    for i in 1..steps {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let integral = acc * h / 3.0;
    let inv = 2f64.powi(n as i32 - 2) / surface_area(n) * integral;
    1.0 / inv
}

pub fn make_bump_kernel(eta: f64, grid: Arc<SphereGrid>, phi: Profile) -> Result<BumpKernel> {
    BumpKernel::new(eta, grid, phi)
}

/// `(f ⋆ g_η)(z) = ω_n^{-1} Σ_j f_j g_η(⟨z, θ_j⟩) w_j`, computed by the full
/// O(M²) double sum.
pub fn convolve_direct(f: &RadialField, k: &BumpKernel) -> Result<RadialField> {
    k.grid.ensure_same(f.grid())?;
    let grid = f.grid();
    let omega = grid.area();
    let out = grid
        .nodes()
        .iter()
        .map(|z| {
            grid.nodes()
                .iter()
                .zip(f.values())
                .zip(grid.weights())
                .map(|((th, v), w)| v * k.eval(z.dot(th)) * w)
                .sum::<f64>()
                / omega
        })
        .collect();
    RadialField::new(grid.clone(), out)
}

/// Circulant fast path (n=2): diagonalize the convolution with an FFT.
pub fn convolve_circulant(f: &RadialField, k: &BumpKernel) -> Result<RadialField> {
    k.grid.ensure_same(f.grid())?;
    if f.dim() != 2 {
        return Err(Error::Unsupported("circulant convolution"));
    }
    let m = f.len();
    let spec = k.spectrum();
    let mut buf: Vec<Complex<f64>> = f.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    spec.forward.process(&mut buf);
    for (b, e) in buf.iter_mut().zip(&spec.eigen) {
        *b *= *e;
    }
    spec.inverse.process(&mut buf);
    let inv_m = 1.0 / m as f64;
    RadialField::new(
        f.grid().clone(),
        buf.into_iter().map(|c| c.re * inv_m).collect(),
    )
}

fn convolve_banded(f: &RadialField, k: &BumpKernel) -> RadialField {
    let m = f.len() as isize;
    let v = f.values();
    let band = &k.band;
    let out = (0..m)
        .map(|i| {
            let mut s = band[0] * v[i as usize];
            for (o, c) in band.iter().enumerate().skip(1) {
                let o = o as isize;
                s += c * (v[(i + o).rem_euclid(m) as usize] + v[(i - o).rem_euclid(m) as usize]);
            }
            s
        })
        .collect();
    RadialField::new(f.grid().clone(), out).expect("same grid")
}

/// Spherical convolution `f ⋆ g_η`.
///
/// On the circle a narrow kernel is summed over its band directly, a wide one
/// through the FFT; both equal the direct sum to rounding. On S² the direct
/// sum is used.
pub fn spherical_convolve(f: &RadialField, k: &BumpKernel) -> Result<RadialField> {
    k.grid.ensure_same(f.grid())?;
    match f.dim() {
        2 if 2 * k.band.len() < f.len() && k.band.len() <= 48 => Ok(convolve_banded(f, k)),
        2 => convolve_circulant(f, k),
        _ => {
            let grid = f.grid();
            let omega = grid.area();
            let out = grid
                .nodes()
                .iter()
                .map(|z| {
                    grid.cap_indices(z, k.min_dot)
                        .into_iter()
                        .map(|j| f.values()[j] * k.eval(z.dot(&grid.node(j))) * grid.weight(j))
                        .sum::<f64>()
                        / omega
                })
                .collect();
            RadialField::new(grid.clone(), out)
        }
    }
}

/// `r'(θ) = r(θ) + amplitude · g_η(⟨ξ, θ⟩)`.
pub fn add_bump(
    r: &RadialField,
    xi: &Point,
    amplitude: f64,
    k: &BumpKernel,
) -> Result<RadialField> {
    let mut out = r.clone();
    k.deposit(&mut out, xi, amplitude)?;
    Ok(out)
}
