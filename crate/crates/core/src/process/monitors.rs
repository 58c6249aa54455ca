use serde::{Deserialize, Serialize};

use super::GrowthState;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::rules::RuleSet;

/// Stopping-time monitors: the first time `‖r‖_∞ > 1/δ_radius` and the first
/// time the hitting density drops below `δ_density` somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub delta_density: f64,
    pub delta_radius: f64,
    radius_time: Option<f64>,
    density_time: Option<f64>,
}

impl Monitors {
    pub fn new(delta_density: f64, delta_radius: f64) -> Result<Self> {
        if !(delta_density >= 0.0) || !(delta_radius > 0.0) {
            return Err(Error::invalid(
                "delta",
                "monitor thresholds must be positive",
            ));
        }
        Ok(Self {
            delta_density,
            delta_radius,
            radius_time: None,
            density_time: None,
        })
    }

    pub fn radius_triggered(&self) -> Option<f64> {
        self.radius_time
    }

    pub fn density_triggered(&self) -> Option<f64> {
        self.density_time
    }

    pub fn any_triggered(&self) -> bool {
        self.radius_time.is_some() || self.density_time.is_some()
    }

    pub fn observe_radius(&mut self, state: &GrowthState) {
        if self.radius_time.is_none() && state.r.max() > 1.0 / self.delta_radius {
            self.radius_time = Some(state.t);
        }
    }

    pub fn observe_density(&mut self, min_density: f64, t: f64) {
        if self.density_time.is_none() && min_density < self.delta_density {
            self.density_time = Some(t);
        }
    }

    pub fn ensure_quiet(&self) -> Result<()> {
        if let Some(time) = self.radius_time {
            return Err(Error::MonitorTriggered {
                name: "radius",
                time,
            });
        }
        if let Some(time) = self.density_time {
            return Err(Error::MonitorTriggered {
                name: "density",
                time,
            });
        }
        Ok(())
    }

    pub(crate) fn rescaled(&self, time_factor: f64) -> Self {
        Self {
            radius_time: self.radius_time.map(|t| t * time_factor),
            density_time: self.density_time.map(|t| t * time_factor),
            ..*self
        }
    }
}

/// Updates `m` with the current state. The density check needs an exact
/// hitting rule and is skipped for Monte Carlo ones.
pub fn check_monitors(state: &GrowthState, rules: &RuleSet, m: &Monitors) -> Result<Monitors> {
    let mut out = *m;
    out.observe_radius(state);
    if rules.hitting.is_exact() && out.density_time.is_none() {
        let d = rules
            .view(&state.r)?
            .density(&state.x, &mut RngStream::new(0))?;
        out.observe_density(d.field.min(), state.t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{HittingRule, TransportRule};
    use crate::sphere::{make_bump_kernel, make_grid, Point, Profile, RadialField};

    fn uniform_rules() -> RuleSet {
        let g = make_grid(2, 256).unwrap();
        let k = make_bump_kernel(0.1, g, Profile::Cosine).unwrap();
        RuleSet::new(HittingRule::Uniform, TransportRule::Origin, k).unwrap()
    }

    fn state(c: f64) -> GrowthState {
        let g = make_grid(2, 256).unwrap();
        GrowthState::new(RadialField::constant(g, c), Point::origin(2)).unwrap()
    }

    #[test]
    fn fresh_disk_is_quiet() {
        let m = check_monitors(
            &state(1.0),
            &uniform_rules(),
            &Monitors::new(1e-6, 1e-6).unwrap(),
        )
        .unwrap();
        assert!(!m.any_triggered());
    }

    #[test]
    fn radius_and_density_triggers() {
        let rules = uniform_rules();
        let m = check_monitors(&state(2.0), &rules, &Monitors::new(1e-6, 1.0).unwrap()).unwrap();
        assert_eq!(m.radius_triggered(), Some(0.0));
        let m = check_monitors(&state(1.0), &rules, &Monitors::new(1.0, 1e-6).unwrap()).unwrap();
        assert_eq!(m.density_triggered(), Some(0.0));
        assert!(m.ensure_quiet().is_err());
    }

    #[test]
    fn trigger_times_are_immutable() {
        let mut m = Monitors::new(1.0, 1e-6).unwrap();
        m.observe_density(0.1, 0.5);
        m.observe_density(0.0, 0.9);
        assert_eq!(m.density_triggered(), Some(0.5));
    }
}
