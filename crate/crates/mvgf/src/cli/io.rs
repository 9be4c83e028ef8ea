//! Artifact file formats.
//!
//! - MVGF binary snapshots: magic `MVGF`, format version u32 = 1, dim u32,
//!   M u32, channel count u32, then channel-major float64 values in
//!   row-major node order, all little-endian.
//! - Trajectory CSV: provenance header (`# ...` comment lines embedding the
//!   serialized scenario and artifact version), the column header
//!   `t,F,U_part,V_part,W_part,dissipation,mass,rho_min,rho_max`, one row
//!   per report, and a final `# summary: {...}` record.
//! - Particle runs use the same CSV with an extra trailing `source` column.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::energy::EnergyReport;
use crate::error::MvgfError;
use crate::flow::{TerminalStatus, TrajectoryLog};
use crate::grid::{create_grid, RealField};
use crate::Result;

const MAGIC: &[u8; 4] = b"MVGF";
const FORMAT_VERSION: u32 = 1;

/// Writes a field in the MVGF snapshot format.
pub fn write_snapshot(path: &Path, field: &RealField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(field.grid().dim() as u32).to_le_bytes())?;
    w.write_all(&(field.grid().points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&(field.channels() as u32).to_le_bytes())?;
    for v in field.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an MVGF snapshot.
pub fn read_snapshot(path: &Path) -> Result<RealField> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(MvgfError::Format(format!(
            "{}: bad magic bytes {magic:?}",
            path.display()
        )));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(MvgfError::Format(format!(
            "{}: unsupported format version {version}",
            path.display()
        )));
    }
    let dim = read_u32(&mut r)? as usize;
    let m = read_u32(&mut r)? as usize;
    let channels = read_u32(&mut r)? as usize;
    let grid = create_grid(dim, m)?;
    let count = grid.len() * channels;
    let mut data = Vec::with_capacity(count);
    let mut f64buf = [0u8; 8];
    for _ in 0..count {
        r.read_exact(&mut f64buf)?;
        data.push(f64::from_le_bytes(f64buf));
    }
    RealField::from_data(grid, channels, data)
}

/// `# ...` provenance block: artifact version plus the serialized scenario.
pub fn provenance_header(scenario_text: &str) -> String {
    let mut out = format!("# mvgf {}\n", env!("CARGO_PKG_VERSION"));
    out.push_str("# scenario:\n");
    for line in scenario_text.lines() {
        out.push_str("#   ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn summary_line(log: &TrajectoryLog) -> String {
    let terminal = log.terminal_report();
    format!(
        "# summary: {{status: {}, t_final: {:.9e}, F_final: {:.16e}, I_final: {:.16e}}}",
        log.terminal_status.label(),
        terminal.map(|r| r.t).unwrap_or(f64::NAN),
        terminal.map(|r| r.f).unwrap_or(f64::NAN),
        terminal
            .and_then(|r| r.dissipation)
            .unwrap_or(f64::NAN),
    )
}

/// Writes the trajectory CSV with provenance header and summary record.
pub fn write_trajectory_csv(
    path: &Path,
    scenario_text: &str,
    log: &TrajectoryLog,
    source: Option<&str>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(provenance_header(scenario_text).as_bytes())?;
    match source {
        Some(_) => writeln!(w, "{},source", EnergyReport::CSV_HEADER)?,
        None => writeln!(w, "{}", EnergyReport::CSV_HEADER)?,
    }
    for rep in &log.reports {
        match source {
            Some(s) => writeln!(w, "{},{s}", rep.csv_row())?,
            None => writeln!(w, "{}", rep.csv_row())?,
        }
    }
    writeln!(w, "{}", summary_line(log))?;
    w.flush()?;
    Ok(())
}

/// Reads a trajectory CSV back into reports plus the terminal status parsed
/// from the summary record. Tolerates the optional `source` column.
pub fn read_trajectory_csv(path: &Path) -> Result<(Vec<EnergyReport>, TerminalStatus)> {
    let file = File::open(path)?;
    let mut reports = Vec::new();
    let mut status = TerminalStatus::TEndReached;
    for line in BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# summary:") {
            status = if rest.contains("status: converged") {
                TerminalStatus::Converged
            } else if rest.contains("status: blowup_detected") {
                TerminalStatus::BlowupDetected
            } else if rest.contains("status: step_failure") {
                TerminalStatus::StepFailure {
                    t: f64::NAN,
                    reason: "from summary record".into(),
                }
            } else {
                TerminalStatus::TEndReached
            };
            continue;
        }
        if trimmed.starts_with('#') || trimmed.starts_with('t') {
            continue;
        }
        let cols: Vec<&str> = trimmed.split(',').collect();
        if cols.len() < 9 {
            return Err(MvgfError::Format(format!(
                "{}: expected at least 9 CSV columns, got {}",
                path.display(),
                cols.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| MvgfError::Format(format!("{}: bad number `{s}`", path.display())))
        };
        reports.push(EnergyReport {
            t: num(cols[0])?,
            f: num(cols[1])?,
            u_part: num(cols[2])?,
            v_part: num(cols[3])?,
            w_part: num(cols[4])?,
            dissipation: if cols[5].is_empty() {
                None
            } else {
                Some(num(cols[5])?)
            },
            mass: num(cols[6])?,
            rho_min: num(cols[7])?,
            rho_max: num(cols[8])?,
        });
    }
    Ok((reports, status))
}

/// Snapshot filename carrying the index and the time stamp.
pub fn snapshot_filename(index: usize, t: f64) -> String {
    format!("snap_{index:06}_t{t:.12e}.mvgf")
}

/// Lists `snapshots/` of a run directory as (t, path), time-ordered.
pub fn list_snapshots(dir: &Path) -> Result<Vec<(f64, PathBuf)>> {
    let mut out = Vec::new();
    if !dir.is_dir() {
        return Ok(out);
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = match path.file_name().and_then(|n| n.to_str()) {
            Some(n) => n,
            None => continue,
        };
        if let Some(stripped) = name.strip_prefix("snap_").and_then(|n| n.strip_suffix(".mvgf")) {
            if let Some(tpos) = stripped.find("_t") {
                if let Ok(t) = stripped[tpos + 2..].parse::<f64>() {
                    out.push((t, path));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Ok(out)
}
