//! CSV rendering of trajectories and sweeps, and atomic file writes.
//!
//! Numbers use Rust's shortest round-trip formatting, so a parsed and
//! re-rendered file is byte-identical.

use std::io;
use std::path::Path;

use crate::integrator::Trajectory;
use crate::model::State8;

pub const TRAJECTORY_HEADER: &str = "t,S_h,E_h,I_h,R_h,A_m,S_m,E_m,I_m";

/// One trajectory row: time followed by the eight compartments.
pub type TrajectoryRow = [f64; 9];

pub fn trajectory_rows(tr: &Trajectory) -> Vec<TrajectoryRow> {
    tr.times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| {
            let v = s.to_array();
            [*t, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]]
        })
        .collect()
}

pub fn render_trajectory_rows(rows: &[TrajectoryRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 160);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn render_trajectory(tr: &Trajectory) -> String {
    render_trajectory_rows(&trajectory_rows(tr))
}

pub fn parse_trajectory(text: &str) -> Result<Vec<TrajectoryRow>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TRAJECTORY_HEADER => {}
        Some(h) => return Err(format!("unexpected header '{h}'")),
        None => return Err("empty file".into()),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(format!("line {}: expected 9 fields, got {}", i + 2, fields.len()));
            }
            let mut row = [0.0; 9];
            for (slot, f) in row.iter_mut().zip(fields) {
                *slot = f.parse().map_err(|_| format!("line {}: invalid number '{f}'", i + 2))?;
            }
            Ok(row)
        })
        .collect()
}

pub fn row_state(row: &TrajectoryRow) -> State8 {
    State8::from_array(std::array::from_fn(|i| row[i + 1]))
}

/// Writes through a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
