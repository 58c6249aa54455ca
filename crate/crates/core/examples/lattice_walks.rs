//! The lattice walks whose continuum limits motivate the transport rules:
//! a once-reinforced walk and the three once-excited walks.
//!
//! ```text
//! cargo run --release --example lattice_walks -- [out_dir] [steps]
//! ```

use std::path::Path;

use stargrowth::lattice::{
    run_lattice, write_lattice, Excitation, LatticeConfig, WalkRule, DEFAULT_HALF_WIDTH,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let out = args
        .first()
        .cloned()
        .unwrap_or_else(|| "lattice_out".into());
    let steps: u64 = args
        .get(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(200_000);

    let walks = [
        ("orrw-a5", WalkRule::Orrw { a: 5.0 }),
        (
            "oerw-proportional",
            WalkRule::Oerw {
                excitation: Excitation::ProportionalCoordinate,
            },
        ),
        (
            "oerw-largest",
            WalkRule::Oerw {
                excitation: Excitation::LargestCoordinate,
            },
        ),
        (
            "oerw-both",
            WalkRule::Oerw {
                excitation: Excitation::BothCoordinates,
            },
        ),
    ];
    for (name, rule) in walks {
        let cfg = LatticeConfig {
            rule,
            steps,
            half_width: DEFAULT_HALF_WIDTH,
            seed: 4,
            check_every: steps / 4,
        };
        let (walk, summary) = run_lattice(&cfg)?;
        println!(
            "{name:<18} range {:>7}  aspect {:.3}  excitation moves {:>6}  connected {}  halted {}",
            summary.range_size,
            summary.aspect_ratio,
            summary.excitation_moves,
            summary.connected,
            summary.halted
        );
        write_lattice(&Path::new(&out).join(name), &walk, &summary, &cfg)?;
    }
    Ok(())
}
