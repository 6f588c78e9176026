//! Deterministic report serialization.
//!
//! Reports must be byte-identical across reruns and worker counts, so
//! everything here is fixed-order and timestamp-free: floats carry 17
//! significant digits, tables have a frozen column order, and lines end
//! with a bare line feed.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

/// Frozen schema of the per-radius table.
pub const PER_RADIUS_HEADER: &str = "r\tV_measured\tV_series\tresidual";

/// Frozen schema of the per-point table.
pub const PER_POINT_HEADER: &str =
    "x0\tx1\tx2\tx3\ttau\triemann2\tricci2\tweyl2\ttraceless_ricci2\tlaplacian_tau\ta2\ta4";

/// 17 significant digits; enough to reproduce any f64 exactly.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Tab-joined row of 17-digit floats.
pub fn tsv_row(fields: &[f64]) -> String {
    let mut row = String::new();
    for (i, x) in fields.iter().enumerate() {
        if i > 0 {
            row.push('\t');
        }
        let _ = write!(row, "{x:.16e}");
    }
    row
}

/// Point coordinates as a parenthesized tuple for summary prose.
pub fn fmt_point(coords: &[f64]) -> String {
    let mut s = String::from("(");
    for (i, c) in coords.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{c:.16e}");
    }
    s.push(')');
    s
}

/// Assembled report content; tables are present only when an analysis
/// produced rows.
#[derive(Debug, Default)]
pub struct ReportFiles {
    pub summary: String,
    pub per_point: Option<String>,
    pub per_radius: Option<String>,
}

impl ReportFiles {
    /// Writes `summary.txt` and any tables under `dir`, creating it if
    /// needed. Returns the written paths in fixed order.
    pub fn write(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let summary_path = dir.join("summary.txt");
        fs::write(&summary_path, self.summary.as_bytes())?;
        written.push(summary_path);
        if let Some(table) = &self.per_point {
            let path = dir.join("per_point.tsv");
            fs::write(&path, table.as_bytes())?;
            written.push(path);
        }
        if let Some(table) = &self.per_radius {
            let path = dir.join("per_radius.tsv");
            fs::write(&path, table.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_17_significant_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(2.0), "2.0000000000000000e0");
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn rows_are_tab_separated() {
        let row = tsv_row(&[1.0, 0.5]);
        assert_eq!(row, "1.0000000000000000e0\t5.0000000000000000e-1");
    }

    #[test]
    fn write_emits_only_present_tables() {
        let dir = std::env::temp_dir().join("geoball_report_test");
        let _ = fs::remove_dir_all(&dir);
        let files = ReportFiles {
            summary: "summary\n".into(),
            per_point: None,
            per_radius: Some(format!("{PER_RADIUS_HEADER}\n")),
        };
        let written = files.write(&dir).unwrap();
        assert_eq!(written.len(), 2);
        assert!(dir.join("summary.txt").exists());
        assert!(!dir.join("per_point.tsv").exists());
        let radius = fs::read_to_string(dir.join("per_radius.tsv")).unwrap();
        assert!(radius.starts_with("r\tV_measured"));
        let _ = fs::remove_dir_all(&dir);
    }
}
