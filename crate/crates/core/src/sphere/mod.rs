//! Discretized functions on S^{n-1}: grids, norms, volumes, spherical
//! convolution and local bump kernels.

mod field;
mod grid;
pub mod io;
mod kernel;
mod point;

pub use field::{leb_volume, lp_norm, oscillation, RadialField};
pub use grid::{make_grid, surface_area, SphereGrid, MIN_NODES};
pub use kernel::{
    add_bump, continuum_c_eta, convolve_circulant, convolve_direct, is_resolved, make_bump_kernel,
    spherical_convolve, BumpKernel, Profile,
};
pub use point::Point;
