//! Random growth of star-shaped domains.
//!
//! A domain is stored as its radial function `r` sampled on a grid of
//! directions ([`sphere`]). At exponential times of rate `1/ε` a boundary
//! direction `ξ` is drawn from a hitting rule seen from an interior particle
//! `x`, a small bump of volume `ε` is added to `r` around `ξ`, and the
//! particle is moved by a transport rule ([`rules`], [`process`]).
//! As `ε → 0` the radial function follows the averaged ODE `ṙ = b̄(r)`,
//! where `b̄` is the drift averaged over the frozen particle chain ([`ode`]).
//!
//! Higher-level experiments live in [`experiments`]: ε sweeps against the
//! ODE, renormalized runs toward invariant shapes, and long planar runs.
//! [`lattice`] holds the once-reinforced and origin-excited walks on `Z²`,
//! [`validation`] the numerical checks of kernels and samplers, and [`cli`]
//! the `stargrowth` command line front end.
//!
//! Runnable examples, one per capability:
//!
//! | example | shows |
//! |---|---|
//! | `simulate_growth` | one process run and its output files |
//! | `averaged_ode` | ODE integration, volume law, invariant-shape residuals |
//! | `sampler_checks` | kernel normalization, walk-on-spheres exits, Monte Carlo density |
//! | `scaling_coupling` | the coupled `ε` and scale-1 runs |
//! | `averaging_sweep` | distance of the process from the ODE across ε |
//! | `shape_rescale` | renormalized runs along a ladder of sizes |
//! | `long_time_shapes` | diameter and shape diagnostics of long planar runs |
//! | `lattice_walks` | the lattice walks and their range exports |
//! | `cli_replay` | the command line front end and byte-identical replay |
//!
//! ```no_run
//! use stargrowth::process::{simulate, SimulationConfig};
//! use stargrowth::rules::{HittingRule, RuleConfig, TransportRule};
//! use stargrowth::shapes::ShapeSpec;
//! use stargrowth::sphere::{make_grid, Point};
//! use stargrowth::RngStream;
//!
//! let grid = make_grid(2, 4096)?;
//! let rules = RuleConfig::new(HittingRule::BoundaryProportional, TransportRule::GammaLinear { gamma: 0.5 })
//!     .build(grid.clone())?;
//! let r0 = ShapeSpec::sunflower().build(grid)?;
//! let run = simulate(r0, Point::origin(2), &rules, &SimulationConfig::new(1e-2, 1.0), &mut RngStream::new(1))?;
//! println!("{} jumps", run.jumps.len());
//! # Ok::<(), stargrowth::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod lattice;
pub mod ode;
pub mod output;
pub mod process;
pub mod rng;
pub mod rules;
pub mod shapes;
pub mod sphere;
pub mod validation;

pub use error::{Error, Result};
pub use rng::RngStream;
