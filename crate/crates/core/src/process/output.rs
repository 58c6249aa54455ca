use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::Trajectory;
use crate::error::Result;
use crate::output::{write_atomic, write_json};
use crate::sphere::io::fmt_f64;

pub const TRAJECTORY_FILES: [&str; 5] = [
    "meta.json",
    "snapshots.csv",
    "particle.csv",
    "jumps.csv",
    "monitors.json",
];

#[derive(Serialize)]
struct MonitorReport {
    delta_density: f64,
    delta_radius: f64,
    radius_triggered: bool,
    radius_trigger_time: Option<f64>,
    density_triggered: bool,
    density_trigger_time: Option<f64>,
    jumps: u64,
    clamps: u64,
    outside: u64,
    undersampled: u64,
}

/// Writes the five run files into `dir`; `meta` becomes `meta.json`.
pub fn write_trajectory<M: Serialize>(dir: &Path, traj: &Trajectory, meta: &M) -> Result<()> {
    let n = traj.final_state.r.dim();
    write_json(&dir.join("meta.json"), meta)?;

    let mut s = String::from("t,theta_index,r\n");
    for snap in &traj.snapshots {
        let t = fmt_f64(snap.t);
        for (j, v) in snap.r.values().iter().enumerate() {
            let _ = writeln!(s, "{t},{j},{}", fmt_f64(*v));
        }
    }
    write_atomic(&dir.join("snapshots.csv"), s.as_bytes())?;

    let mut s = String::from("t");
    for i in 1..=n {
        let _ = write!(s, ",x{i}");
    }
    s.push('\n');
    for (t, x) in &traj.particle {
        s.push_str(&fmt_f64(*t));
        for c in x.coords() {
            let _ = write!(s, ",{}", fmt_f64(*c));
        }
        s.push('\n');
    }
    write_atomic(&dir.join("particle.csv"), s.as_bytes())?;

    let mut s = if n == 2 {
        String::from("t,xi_angle,eta,y,dleb\n")
    } else {
        String::from("t,xi1,xi2,xi3,eta,y,dleb\n")
    };
    for j in &traj.jumps {
        s.push_str(&fmt_f64(j.t));
        if n == 2 {
            let _ = write!(s, ",{}", fmt_f64(j.xi.angle()));
        } else {
            for c in j.xi.coords() {
                let _ = write!(s, ",{}", fmt_f64(*c));
            }
        }
        let _ = writeln!(
            s,
            ",{},{},{}",
            fmt_f64(j.eta),
            fmt_f64(j.y),
            fmt_f64(j.dleb)
        );
    }
    write_atomic(&dir.join("jumps.csv"), s.as_bytes())?;

    let m = &traj.monitors;
    let st = &traj.final_state;
    let report = MonitorReport {
        delta_density: m.delta_density,
        delta_radius: m.delta_radius,
        radius_triggered: m.radius_triggered().is_some(),
        radius_trigger_time: m.radius_triggered(),
        density_triggered: m.density_triggered().is_some(),
        density_trigger_time: m.density_triggered(),
        jumps: st.jumps,
        clamps: st.clamps,
        outside: st.outside,
        undersampled: st.undersampled,
    };
    write_json(&dir.join("monitors.json"), &report)
}
