//! PGM images and plain-text check reports.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::checks::CheckReport;
use crate::error::{Error, Result};
use crate::grid::IndicatorGrid;

/// Binary P5 bytes: header, then one gray byte per pixel, row 0 at the top.
pub fn pgm_bytes(grid: &IndicatorGrid) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", grid.grid.width, grid.grid.height);
    let mut out = Vec::with_capacity(header.len() + grid.classes.len());
    out.extend_from_slice(header.as_bytes());
    out.extend(grid.classes.iter().map(|c| c.gray()));
    out
}

pub fn write_pgm(grid: &IndicatorGrid, path: &Path) -> Result<()> {
    fs::write(path, pgm_bytes(grid)).map_err(|e| Error::io(path, e))
}

/// Reals in reports use 17 significant digits, enough to round-trip.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn report_text(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(
            out,
            "check={} semigroup={} residual={} threshold={} verdict={}",
            r.name,
            r.label,
            real(r.residual),
            real(r.threshold),
            r.verdict
        );
        for s in &r.violation_samples {
            let _ = writeln!(
                out,
                "  z={},{} class_before={} class_after={}",
                real(s.z.re),
                real(s.z.im),
                s.class_before.name(),
                s.class_after.name()
            );
        }
    }
    out
}

pub fn write_report(reports: &[CheckReport], path: &Path) -> Result<()> {
    fs::write(path, report_text(reports)).map_err(|e| Error::io(path, e))
}
