//! Long planar runs with the harmonic measure estimated by walk-on-spheres
//! and three lattice-inspired transport rules. Each run records the
//! diameter, the oscillation of the volume-normalized profile and the
//! axis/diagonal ratio at quadratically spaced times.
//!
//! ```text
//! cargo run --release --example long_time_shapes -- [out_dir] [eps] [horizon]
//! ```

use std::path::Path;

use stargrowth::experiments::{figure3_run, write_figure3, Figure3Config, GridSpec};
use stargrowth::process::{Clock, SnapshotPlan};
use stargrowth::rules::{AxisNorm, HittingRule, RuleConfig, TransportRule};
use stargrowth::shapes::ShapeSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args.first().cloned().unwrap_or_else(|| "shapes_out".into());
    let eps: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-2);
    let horizon: f64 = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(4.0);

    let transports = [
        ("l1-pull", TransportRule::NormShift { norm: AxisNorm::L1 }),
        ("step-largest", TransportRule::StepLargest),
        ("step-both", TransportRule::StepBoth),
    ];
    for (name, h) in transports {
        let cfg = Figure3Config {
            rules: RuleConfig::new(
                HittingRule::HarmonicMc {
                    n_exits: 1000,
                    refresh: 20,
                },
                h,
            ),
            r0: ShapeSpec::sunflower(),
            eps,
            horizon,
            grid: GridSpec::new(2, 4096),
            seed: 2,
            snapshots: SnapshotPlan::Quadratic { count: 8 },
            clock: Clock::Exponential,
        };
        let res = figure3_run(&cfg)?;
        println!("{name}");
        for k in 0..res.diameter.times.len() {
            println!(
                "  t = {:>6.3}  diameter = {:.3}  osc = {:.3}  axis/diagonal = {:.3}",
                res.diameter.times[k],
                res.diameter.values[k],
                res.oscillation.values[k],
                res.axis_diagonal_ratio.values[k]
            );
        }
        write_figure3(&Path::new(&out).join(name), &res, &cfg)?;
    }
    Ok(())
}
