use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::OdeTrajectory;
use crate::error::Result;
use crate::output::{write_atomic, write_json};
use crate::sphere::io::fmt_f64;

pub const ODE_FILES: [&str; 4] = [
    "meta.json",
    "ode_trajectory.csv",
    "bbar_stderr.csv",
    "residuals.json",
];

#[derive(Serialize)]
struct VolumeRow {
    t: f64,
    leb: f64,
    residual: f64,
}

#[derive(Serialize)]
struct Residuals<'a, E: Serialize> {
    max_volume_law_error: f64,
    volume_law: Vec<VolumeRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    extra: Option<&'a E>,
}

/// Writes the ODE run files; `extra` is embedded in `residuals.json`.
pub fn write_ode<M: Serialize, E: Serialize>(
    dir: &Path,
    traj: &OdeTrajectory,
    meta: &M,
    extra: Option<&E>,
) -> Result<()> {
    write_json(&dir.join("meta.json"), meta)?;
    let mut s = String::from("t,theta_index,r\n");
    for (t, r) in traj.times.iter().zip(&traj.states) {
        let t = fmt_f64(*t);
        for (j, v) in r.values().iter().enumerate() {
            let _ = writeln!(s, "{t},{j},{}", fmt_f64(*v));
        }
    }
    write_atomic(&dir.join("ode_trajectory.csv"), s.as_bytes())?;

    let mut s = String::from("t,theta_index,bbar,stderr\n");
    for (t, d) in traj.times.iter().zip(&traj.drift) {
        let t = fmt_f64(*t);
        for (j, b) in d.bbar.values().iter().enumerate() {
            let se = d.stderr.as_ref().map_or(0.0, |e| e.values()[j]);
            let _ = writeln!(s, "{t},{j},{},{}", fmt_f64(*b), fmt_f64(se));
        }
    }
    write_atomic(&dir.join("bbar_stderr.csv"), s.as_bytes())?;

    let leb0 = traj.states[0].leb_volume()?;
    let mut rows = Vec::with_capacity(traj.times.len());
    for (t, r) in traj.times.iter().zip(&traj.states) {
        let leb = r.leb_volume()?;
        rows.push(VolumeRow {
            t: *t,
            leb,
            residual: leb - leb0 - t,
        });
    }
    let report = Residuals {
        max_volume_law_error: rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max),
        volume_law: rows,
        extra,
    };
    write_json(&dir.join("residuals.json"), &report)
}
