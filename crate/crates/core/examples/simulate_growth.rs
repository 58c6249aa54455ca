//! One run of the growth process with the harmonic measure estimated by
//! walk-on-spheres and the γ-linear pull towards the hit point.
//!
//! ```text
//! cargo run --release --example simulate_growth -- [out_dir] [eps]
//! ```
//!
//! Writes the standard trajectory files and prints the volume law check
//! `Leb(r_t) − Leb(r_0) ≈ t` at every snapshot.

use std::path::Path;

use stargrowth::process::{simulate, write_trajectory, SimulationConfig, SnapshotPlan};
use stargrowth::rules::{HittingRule, RuleConfig, TransportRule};
use stargrowth::shapes::ShapeSpec;
use stargrowth::sphere::{make_grid, Point};
use stargrowth::RngStream;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args
        .first()
        .cloned()
        .unwrap_or_else(|| "simulate_out".into());
    let eps: f64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-2);

    let grid = make_grid(2, 4096)?;
    let rules_cfg = RuleConfig::new(
        HittingRule::HarmonicMc {
            n_exits: 1000,
            refresh: 10,
        },
        TransportRule::GammaLinear { gamma: 0.5 },
    );
    let rules = rules_cfg.build(grid.clone())?;
    let r0 = ShapeSpec::sunflower().build(grid)?;
    let leb0 = r0.leb_volume()?;

    let cfg = SimulationConfig::new(eps, 1.0).with_snapshots(SnapshotPlan::Uniform { count: 10 });
    let traj = simulate(r0, Point::origin(2), &rules, &cfg, &mut RngStream::new(1))?;

    println!(
        "{} jumps, final x = {:?}",
        traj.jumps.len(),
        traj.final_state.x
    );
    for s in &traj.snapshots {
        let gain = s.r.leb_volume()? - leb0;
        println!(
            "t = {:.2}  Leb gain = {:.4}  osc = {:.4}",
            s.t,
            gain,
            s.r.oscillation()
        );
    }

    let meta = serde_json::json!({ "rules": rules_cfg, "config": cfg, "seed": 1 });
    write_trajectory(Path::new(&out), &traj, &meta)?;
    println!("wrote {out}");
    Ok(())
}
