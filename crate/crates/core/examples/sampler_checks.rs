//! Numerical checks of the building blocks: bump kernel normalization,
//! walk-on-spheres exits against the Poisson kernel, and the Monte Carlo
//! harmonic density against its exact counterpart.
//!
//! ```text
//! cargo run --release --example sampler_checks
//! ```

use stargrowth::rules::WOS_SHELL;
use stargrowth::validation::{harmonic_mc_vs_exact, kernel_normalization, wos_disk_ks};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for k in kernel_normalization(&[0.02, 0.05, 0.1, 0.2], 2, 4096)? {
        println!(
            "η = {:<5} M = {}  max |1 ⋆ g − 1| = {:.2e}",
            k.eta, k.m, k.max_error
        );
    }
    for rho in [0.0, 0.5, 0.8] {
        let c = wos_disk_ks(rho, 50_000, WOS_SHELL, 7)?;
        println!(
            "walk-on-spheres from ρ = {rho}: KS = {:.4} over {} exits",
            c.ks, c.exits
        );
    }
    for exits in [1_000, 10_000] {
        let d = harmonic_mc_vs_exact(1024, 0.4, exits, 11)?;
        println!(
            "Monte Carlo harmonic density, {exits} exits: L1 = {:.3}",
            d.l1
        );
    }
    Ok(())
}
