//! Probe histories as CSV with 17 significant digits, so files written from
//! identical doubles are identical bytes.

use std::fmt::Write;

use crate::assembly::ProbeHistory;
use crate::error::{format_err, Result};

pub const PROBE_HEADER: &str = "t [s],u_x [m],u_y [m],u_z [m],a_x [m/s^2],a_y [m/s^2],a_z [m/s^2]";

pub fn probe_file_name(name: &str) -> String {
    format!("probe_{name}.csv")
}

pub fn probe_csv(rows: &[[f64; 7]]) -> String {
    let mut out = String::with_capacity(PROBE_HEADER.len() + 1 + rows.len() * 7 * 24);
    out.push_str(PROBE_HEADER);
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_probe_csv(text: &str) -> Result<Vec<[f64; 7]>> {
    let mut lines = text.split_terminator('\n');
    if lines.next() != Some(PROBE_HEADER) {
        return Err(format_err("probe CSV", "missing header"));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let mut row = [0.0; 7];
            let mut fields = line.split(',');
            for v in row.iter_mut() {
                let f = fields.next().ok_or_else(|| format_err("probe CSV", format!("row {} is short", i + 1)))?;
                *v = f.parse().map_err(|_| format_err("probe CSV", format!("row {}: bad number {f:?}", i + 1)))?;
            }
            if fields.next().is_some() {
                return Err(format_err("probe CSV", format!("row {} is long", i + 1)));
            }
            Ok(row)
        })
        .collect()
}

/// Writes one file per probe into `dir` and returns the paths.
pub fn write_probe_files(probes: &[ProbeHistory], dir: &std::path::Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    probes
        .iter()
        .map(|p| {
            let path = dir.join(probe_file_name(&p.name));
            std::fs::write(&path, probe_csv(&p.rows))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn any_rows_round_trip(rows in proptest::collection::vec(proptest::array::uniform7(proptest::num::f64::NORMAL | proptest::num::f64::ZERO | proptest::num::f64::SUBNORMAL), 0..20)) {
            let back = parse_probe_csv(&probe_csv(&rows)).unwrap();
            let bits = |r: &[[f64; 7]]| r.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back), bits(&rows));
        }

        #[test]
        fn arbitrary_text_never_panics(text in "\\PC{0,300}") {
            let _ = parse_probe_csv(&text);
        }
    }

    #[test]
    fn round_trips_exactly() {
        let rows = vec![
            [0.0, 1.0 / 3.0, -2.5e-300, f64::MIN_POSITIVE, 1e300, -0.0, 123456789.12345679],
            [0.1, 0.2, 0.30000000000000004, 5e-324, 7.0, 8.0, 9.0],
        ];
        let text = probe_csv(&rows);
        let back = parse_probe_csv(&text).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        assert_eq!(probe_csv(&back), text);
    }

    #[test]
    fn zero_run_gives_zero_columns() {
        let text = probe_csv(&[[0.0; 7], [1e-3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]]);
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,"));
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_probe_csv("t,u\n").is_err());
        let short = format!("{PROBE_HEADER}\n1,2,3\n");
        assert!(parse_probe_csv(&short).is_err());
        let long = format!("{PROBE_HEADER}\n1,2,3,4,5,6,7,8\n");
        assert!(parse_probe_csv(&long).is_err());
        let nan = format!("{PROBE_HEADER}\n1,2,3,4,5,6,x\n");
        assert!(parse_probe_csv(&nan).is_err());
    }
}
