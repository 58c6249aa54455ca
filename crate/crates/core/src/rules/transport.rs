use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::Point;

/// Coordinate norm compared with the Euclidean one in anisotropic pulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisNorm {
    L1,
    Linf,
}

impl AxisNorm {
    /// `|z|_p / |z|_2`.
    pub fn ratio(self, z: &Point) -> f64 {
        let e = z.norm();
        if e == 0.0 {
            return 1.0;
        }
        match self {
            AxisNorm::L1 => z.norm_l1() / e,
            AxisNorm::Linf => z.norm_inf() / e,
        }
    }
}

pub type PullFn = dyn Fn(f64, &Point) -> f64 + Send + Sync;

/// User-defined pull `α(ℓ, z)` with `0 ≤ α(ℓ, z) < ℓ`.
#[derive(Clone)]
pub struct Alpha(pub Arc<PullFn>);

impl fmt::Debug for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Alpha(..)")
    }
}

impl PartialEq for Alpha {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Rule `H(r, ξ)` placing the particle after a hit in direction `ξ`.
///
/// Every variant reads the boundary radius `ℓ = r̃(ξ)` of the smoothed domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TransportRule {
    /// Back to the origin.
    Origin,
    /// `γ ℓ ξ` with `γ ∈ [0, 1)`.
    GammaLinear { gamma: f64 },
    /// `(ℓ − amount)_+ ξ`.
    Shift { amount: f64 },
    /// `(ℓ − |ξ|_p / |ξ|_2)_+ ξ`.
    NormShift { norm: AxisNorm },
    /// `(1 − |ξ|_p / (divisor |ξ|_2)) ℓ ξ`.
    NormScale {
        norm: AxisNorm,
        #[serde(default = "default_divisor")]
        divisor: f64,
    },
    /// From `ℓ ξ`, one unit toward the origin in the coordinate of larger
    /// absolute value (never crossing zero).
    StepLargest,
    /// From `ℓ ξ`, one unit toward the origin in every coordinate.
    StepBoth,
    /// `∫ r̃(z) z dσ(z)`, independent of `ξ`; may leave the domain.
    StatisticalCenter,
    /// `α(ℓ, ξ) ξ` for a user closure.
    #[serde(skip)]
    RadialPull(Alpha),
}

fn default_divisor() -> f64 {
    10.0
}

/// Result of applying a transport rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transported {
    pub point: Point,
    /// The raw output was pulled back inside the smoothed domain.
    pub clamped: bool,
    /// The point lies outside the smoothed domain (statistical center only).
    pub outside: bool,
}

/// Points are kept within this fraction of the boundary radius.
pub const CLAMP_FRACTION: f64 = 1.0 - 1e-9;

impl TransportRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            TransportRule::GammaLinear { gamma } if !(0.0..1.0).contains(gamma) => Err(
                Error::invalid("gamma", format!("must lie in [0, 1), got {gamma}")),
            ),
            TransportRule::Shift { amount } if !(*amount >= 0.0) || !amount.is_finite() => {
                Err(Error::invalid("amount", "must be finite and nonnegative"))
            }
            TransportRule::NormScale { divisor, .. }
                if !(*divisor > 1.0) || !divisor.is_finite() =>
            {
                // |ξ|_1/|ξ|_2 can reach sqrt(n), so a divisor above sqrt(3) keeps the factor positive
                Err(Error::invalid(
                    "divisor",
                    "must be finite and greater than 1",
                ))
            }
            _ => Ok(()),
        }
    }

    /// Whether `H(cr, ξ) = c H(r, ξ)` for every `c > 0`.
    pub fn is_scale_covariant(&self) -> bool {
        matches!(
            self,
            TransportRule::Origin
                | TransportRule::GammaLinear { .. }
                | TransportRule::NormScale { .. }
                | TransportRule::StatisticalCenter
        )
    }

    /// Whether the rule ignores `ξ`.
    pub fn is_constant(&self) -> bool {
        matches!(
            self,
            TransportRule::Origin | TransportRule::StatisticalCenter
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            TransportRule::Origin => "origin",
            TransportRule::GammaLinear { .. } => "gamma-linear",
            TransportRule::Shift { .. } => "shift",
            TransportRule::NormShift { .. } => "norm-shift",
            TransportRule::NormScale { .. } => "norm-scale",
            TransportRule::StepLargest => "step-largest",
            TransportRule::StepBoth => "step-both",
            TransportRule::StatisticalCenter => "statistical-center",
            TransportRule::RadialPull(_) => "radial-pull",
        }
    }

    /// Raw output before clamping. `ell` is the smoothed radius along `xi`;
    /// `center` supplies `∫ r̃(z) z dσ(z)` on demand.
    pub(crate) fn raw_point(&self, xi: &Point, ell: f64, center: impl FnOnce() -> Point) -> Point {
        let dim = xi.dim();
        match self {
            TransportRule::Origin => Point::origin(dim),
            TransportRule::GammaLinear { gamma } => *xi * (gamma * ell),
            TransportRule::Shift { amount } => *xi * (ell - amount).max(0.0),
            TransportRule::NormShift { norm } => *xi * (ell - norm.ratio(xi)).max(0.0),
            TransportRule::NormScale { norm, divisor } => {
                *xi * ((1.0 - norm.ratio(xi) / divisor) * ell)
            }
            TransportRule::StepLargest => {
                let p = *xi * ell;
                let mut k = 0;
                for i in 1..dim {
                    if p.coord(i).abs() > p.coord(k).abs() {
                        k = i;
                    }
                }
                p.with_coord(k, step_toward_zero(p.coord(k)))
            }
            TransportRule::StepBoth => {
                let mut p = *xi * ell;
                for i in 0..dim {
                    p = p.with_coord(i, step_toward_zero(p.coord(i)));
                }
                p
            }
            TransportRule::StatisticalCenter => center(),
            TransportRule::RadialPull(alpha) => *xi * (alpha.0)(ell, xi),
        }
    }
}

fn step_toward_zero(v: f64) -> f64 {
    if v > 0.0 {
        (v - 1.0).max(0.0)
    } else {
        (v + 1.0).min(0.0)
    }
}
