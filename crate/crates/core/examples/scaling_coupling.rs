//! The scaling coupling: an `ε` run and the scale-1 run started from the
//! blown-up domain, driven by the same jump times and hit angles, agree
//! after mapping back with `c = √ε`.
//!
//! ```text
//! cargo run --release --example scaling_coupling -- [eps]
//! ```

use stargrowth::process::{
    coupled_unit_run, rescale_trajectory, simulate, SimulationConfig, SnapshotPlan,
};
use stargrowth::rules::{AxisNorm, HittingRule, RuleConfig, TransportRule};
use stargrowth::shapes::ShapeSpec;
use stargrowth::sphere::{make_grid, Point};
use stargrowth::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eps: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1e-2);
    let grid = make_grid(2, 4096)?;
    let r0 = ShapeSpec::Sunflower { k: 3, amp: 0.2 }.build(grid.clone())?;
    let x0 = Point::new2(0.1, -0.05);
    let cfg = SimulationConfig::new(eps, 0.1).with_snapshots(SnapshotPlan::Uniform { count: 4 });

    let sets = [
        (
            HittingRule::BoundaryProportional,
            TransportRule::GammaLinear { gamma: 0.5 },
        ),
        (
            HittingRule::DistancePower { beta: -1.0 },
            TransportRule::StatisticalCenter,
        ),
        (
            HittingRule::HarmonicMc {
                n_exits: 1000,
                refresh: 1,
            },
            TransportRule::NormScale {
                norm: AxisNorm::L1,
                divisor: 10.0,
            },
        ),
        (HittingRule::Uniform, TransportRule::Shift { amount: 0.1 }),
    ];
    for (f, h) in sets {
        let rules = RuleConfig::new(f, h).build(grid.clone())?;
        let label = format!("{} + {}", rules.hitting.name(), rules.transport.name());
        let small = simulate(r0.clone(), x0, &rules, &cfg, &mut RngStream::new(5))?;
        let unit = coupled_unit_run(&small, r0.clone(), x0, &rules, &cfg, &mut RngStream::new(5))?;
        let mapped = rescale_trajectory(&unit, eps.sqrt())?;
        let gap = mapped
            .snapshots
            .iter()
            .zip(&small.snapshots)
            .flat_map(|(a, b)| {
                a.r.values()
                    .iter()
                    .zip(b.r.values())
                    .map(|(u, v)| (u - v).abs())
            })
            .fold(0.0, f64::max);
        println!(
            "{label:<45} scale invariant: {:<5}  max gap {gap:.2e}",
            rules.is_scale_invariant()
        );
    }
    Ok(())
}
