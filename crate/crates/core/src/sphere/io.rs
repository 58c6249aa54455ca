//! Text serialization of radial fields: `theta_index,theta,value` CSV rows
//! plus a JSON sidecar `{n, M, quantity}`. Values are written with 17
//! significant digits, which round-trips every f64 exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{make_grid, RadialField};
use crate::error::{Error, Result};
use crate::output::write_atomic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub quantity: String,
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn field_to_csv(f: &RadialField) -> String {
    let mut s = String::with_capacity(f.len() * 48);
    s.push_str("theta_index,theta,value\n");
    for (j, v) in f.values().iter().enumerate() {
        let _ = writeln!(s, "{j},{},{}", fmt_f64(f.grid().node_angle(j)), fmt_f64(*v));
    }
    s
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `<path>` (CSV) and `<path with .json extension>` (sidecar).
pub fn write_field(path: &Path, f: &RadialField, quantity: &str) -> Result<()> {
    write_atomic(path, field_to_csv(f).as_bytes())?;
    let meta = FieldSidecar {
        n: f.dim(),
        m: f.len(),
        quantity: quantity.to_string(),
    };
    write_atomic(
        &sidecar_path(path),
        serde_json::to_string_pretty(&meta)?.as_bytes(),
    )
}

pub fn read_field(path: &Path) -> Result<(RadialField, FieldSidecar)> {
    let side = sidecar_path(path);
    let meta_text = std::fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: FieldSidecar = serde_json::from_str(&meta_text)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let grid = make_grid(meta.n, meta.m)?;
    let parse_err = |reason: String| Error::Parse {
        path: path.to_path_buf(),
        reason,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some("theta_index,theta,value") => {}
        other => return Err(parse_err(format!("unexpected header {other:?}"))),
    }
    let mut values = vec![f64::NAN; meta.m];
    let mut seen = 0usize;
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(parse_err(format!(
                "line {}: expected 3 columns",
                lineno + 2
            )));
        }
        let j: usize = cols[0]
            .parse()
            .map_err(|e| parse_err(format!("line {}: {e}", lineno + 2)))?;
        let v: f64 = cols[2]
            .parse()
            .map_err(|e| parse_err(format!("line {}: {e}", lineno + 2)))?;
        if j >= meta.m {
            return Err(parse_err(format!("theta_index {j} out of range")));
        }
        values[j] = v;
        seen += 1;
    }
    if seen != meta.m {
        return Err(parse_err(format!("expected {} rows, found {seen}", meta.m)));
    }
    Ok((RadialField::new(grid, values)?, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::make_grid;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn csv_round_trip_is_bit_exact(vals in prop::collection::vec(-1e300f64..1e300, 16), n in 2usize..=3) {
            let grid = make_grid(n, 16).unwrap();
            let f = RadialField::new(grid, vals).unwrap();
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("r.csv");
            write_field(&p, &f, "r").unwrap();
            let (g, meta) = read_field(&p).unwrap();
            prop_assert_eq!(meta.quantity, "r");
            for (a, b) in f.values().iter().zip(g.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn rejects_truncated_files() {
        let grid = make_grid(2, 16).unwrap();
        let f = RadialField::constant(grid, 1.0);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_field(&p, &f, "r").unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        std::fs::write(&p, cut).unwrap();
        assert!(matches!(read_field(&p), Err(Error::Parse { .. })));
    }
}
