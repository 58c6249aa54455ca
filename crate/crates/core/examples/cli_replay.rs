//! Drives the command line front end in-process: a simulation run, then a
//! replay from the `meta.json` it wrote, which reproduces the outputs
//! byte for byte.
//!
//! ```text
//! cargo run --release --example cli_replay -- [out_dir]
//! ```

use std::path::Path;

use stargrowth::cli;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "cli_out".into());
    let first = Path::new(&out).join("first");
    let replay = Path::new(&out).join("replay");
    std::fs::create_dir_all(&out)?;
    let config = Path::new(&out).join("simulate.json");
    std::fs::write(
        &config,
        r#"{
  "rules": {"F": {"variant": "boundary-proportional"}, "H": {"variant": "gamma-linear", "gamma": 0.5}},
  "r0": {"shape": "sunflower", "k": 3, "amp": 0.2},
  "grid": {"n": 2, "m": 1024},
  "eps": 0.05,
  "horizon": 0.5,
  "seed": 9
}"#,
    )?;

    let code = cli::run([
        "stargrowth",
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        first.to_str().unwrap(),
    ]);
    println!("simulate exited with {code}");
    let meta = first.join("meta.json");
    let code = cli::run([
        "stargrowth",
        "simulate",
        "--config",
        meta.to_str().unwrap(),
        "--out",
        replay.to_str().unwrap(),
    ]);
    println!("replay exited with {code}");

    for entry in std::fs::read_dir(&first)? {
        let name = entry?.file_name();
        let same = std::fs::read(first.join(&name))? == std::fs::read(replay.join(&name))?;
        println!("{:<20} identical: {same}", name.to_string_lossy());
    }
    Ok(())
}
