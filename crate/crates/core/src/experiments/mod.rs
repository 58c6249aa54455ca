//! Reproducible numerical experiments built on the process and ODE layers:
//! ε sweeps against the averaged ODE, rescaled runs toward an invariant
//! shape, and long anisotropic growth runs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sphere::{make_grid, SphereGrid};

pub mod figure3;
pub mod metric;
pub mod rescale;
pub mod sweep;

pub use figure3::{figure3_run, write_figure3, Figure3Config, Figure3Result};
pub use metric::{aggregate, l2_distance_series, quantile, Aggregate, MetricSeries};
pub use rescale::{
    rescale_metric, rescaled_trajectory, shape_rescale_experiment, target_shape, write_rescale,
    RescaleConfig, RescaleResults, RescaleRow,
};
pub use sweep::{
    averaging_sweep, write_sweep, Envelope, Expect, SweepConfig, SweepResults, SweepRow,
    SweepSummary,
};

/// Dimension and node count of the angular grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_n")]
    pub n: usize,
    pub m: usize,
}

fn default_n() -> usize {
    2
}

impl GridSpec {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    pub fn build(&self) -> Result<Arc<SphereGrid>> {
        make_grid(self.n, self.m)
    }
}
