use std::sync::Arc;

use serde::de::{DeserializeOwned, Error as _};
use serde::{Deserialize, Deserializer, Serialize};

use super::{HittingRule, RuleSet, TransportRule};
use crate::error::{Error, Result};
use crate::sphere::{make_bump_kernel, Profile, SphereGrid};

pub const DEFAULT_SMOOTHER_ETA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmootherConfig {
    pub eta: f64,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            eta: DEFAULT_SMOOTHER_ETA,
        }
    }
}

/// JSON form of a [`RuleSet`]:
/// `{"F": {"variant": ...}, "H": {"variant": ...}, "smoother": {"eta": ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(rename = "F", deserialize_with = "strict")]
    pub hitting: HittingRule,
    #[serde(rename = "H", deserialize_with = "strict")]
    pub transport: TransportRule,
    #[serde(default)]
    pub smoother: SmootherConfig,
    /// Use `r̃ = r`.
    #[serde(default)]
    pub force_unsmoothed: bool,
    /// Declared scale invariance; building fails if the variants disagree.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_invariant: Option<bool>,
}

impl RuleConfig {
    pub fn new(hitting: HittingRule, transport: TransportRule) -> Self {
        Self {
            hitting,
            transport,
            smoother: SmootherConfig::default(),
            force_unsmoothed: false,
            scale_invariant: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn build(&self, grid: Arc<SphereGrid>) -> Result<RuleSet> {
        let kernel = make_bump_kernel(self.smoother.eta, grid, Profile::Cosine)?;
        let mut rules = RuleSet::new(self.hitting.clone(), self.transport.clone(), kernel)?;
        if self.force_unsmoothed {
            rules = rules.unsmoothed();
        }
        if let Some(declared) = self.scale_invariant {
            if declared && !rules.is_scale_invariant() {
                return Err(Error::NotScaleInvariant(format!(
                    "{} with {} is not scale invariant",
                    rules.hitting.name(),
                    rules.transport.name()
                )));
            }
        }
        Ok(rules)
    }
}

/// Deserializes a tagged rule and rejects keys that the chosen variant does
/// not use (serde ignores extra keys next to the tag of a unit variant).
fn strict<'de, D, T>(d: D) -> std::result::Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: DeserializeOwned + Serialize,
{
    let input = serde_json::Value::deserialize(d)?;
    let rule: T = serde_json::from_value(input.clone()).map_err(D::Error::custom)?;
    let echo = serde_json::to_value(&rule).map_err(D::Error::custom)?;
    if let (Some(given), Some(known)) = (input.as_object(), echo.as_object()) {
        if let Some(key) = given.keys().find(|k| !known.contains_key(*k)) {
            return Err(D::Error::custom(format!("unknown field `{key}`")));
        }
    }
    Ok(rule)
}
