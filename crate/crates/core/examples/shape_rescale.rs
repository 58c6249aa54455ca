//! Distance between the renormalized scale-1 process started from a large
//! copy of a shape and the shape itself, along a ladder of sizes `N`.
//!
//! ```text
//! cargo run --release --example shape_rescale -- [out_dir]
//! ```

use std::path::Path;

use stargrowth::experiments::{shape_rescale_experiment, write_rescale, GridSpec, RescaleConfig};
use stargrowth::process::Clock;
use stargrowth::rules::{HittingRule, RuleConfig, TransportRule};
use stargrowth::shapes::ShapeSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "rescale_out".into());
    let cfg = RescaleConfig {
        rules: RuleConfig::new(HittingRule::BoundaryProportional, TransportRule::Origin),
        shape: ShapeSpec::Ball { radius: 1.0 },
        ladder: vec![10.0, 100.0, 1000.0],
        c: 1.0,
        s_max: 2.0,
        samples: 10,
        seeds: vec![1, 2, 3],
        grid: GridSpec::new(2, 4096),
        clock: Clock::Exponential,
        coupled: false,
        expect_decreasing: true,
    };
    let res = shape_rescale_experiment(&cfg)?;
    for (n, m) in cfg.ladder.iter().zip(&res.medians) {
        println!("N = {n:>6}  median sup distance = {m:.4}");
    }
    println!("decreasing along the ladder: {}", res.decreasing);
    write_rescale(Path::new(&out), &res)?;
    Ok(())
}
