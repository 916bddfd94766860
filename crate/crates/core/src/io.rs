//! CSV and JSON artifacts.
//!
//! CSV files start with a `# <schema> v<version>` comment line followed by
//! `# key=value` metadata lines and a column header. Floats are written in
//! shortest round-trip form so that reading a file back reproduces the
//! samples bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionState, Snapshot};
use crate::grid::{Grid, SpectralField};
use crate::kernels::KernelTable;

pub const SCHEMA_VERSION: u32 = 1;

/// A report tagged with its schema version.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema_version: u32,
    pub kind: String,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Versioned<T> {
    pub fn new(kind: &str, body: T) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: kind.to_string(),
            body,
        }
    }
}

pub fn to_json<T: Serialize>(kind: &str, body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned::new(kind, body))?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, body: &T) -> Result<()> {
    fs::write(path, to_json(kind, body)?)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Versioned<T>> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn header(schema: &str, meta: &[(&str, String)], columns: &str) -> String {
    let mut s = format!("# {schema} v{SCHEMA_VERSION}\n");
    for (k, v) in meta {
        let _ = writeln!(s, "# {k}={v}");
    }
    s.push_str(columns);
    s.push('\n');
    s
}

fn grid_meta(grid: &Grid) -> Vec<(&'static str, String)> {
    vec![("L", grid.half_length().to_string()), ("N", grid.len().to_string())]
}

/// Two-column profile `x,value`.
pub fn profile_csv(phi: &SpectralField, extra: &[(&str, String)]) -> String {
    let mut meta = grid_meta(phi.grid());
    meta.extend(extra.iter().map(|(k, v)| (*k, v.clone())));
    let mut s = header("whitham-profile", &meta, "x,value");
    for (x, v) in phi.grid().points().iter().zip(phi.values()) {
        let _ = writeln!(s, "{x},{v}");
    }
    s
}

pub fn write_profile(path: &Path, phi: &SpectralField, extra: &[(&str, String)]) -> Result<()> {
    fs::write(path, profile_csv(phi, extra))?;
    Ok(())
}

/// A profile read back from disk with its metadata lines.
#[derive(Debug, Clone)]
pub struct StoredProfile {
    pub field: SpectralField,
    pub meta: Vec<(String, String)>,
}

impl StoredProfile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn parse_profile(text: &str) -> Result<StoredProfile> {
    let mut meta = Vec::new();
    let mut xs = Vec::new();
    let mut vals = Vec::new();
    let mut saw_columns = false;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !saw_columns {
            saw_columns = true;
            if line.starts_with('x') {
                continue;
            }
        }
        let mut cols = line.split(',');
        let parse = |s: Option<&str>, what: &str| -> Result<f64> {
            s.ok_or_else(|| Error::Parse(format!("line {line_no}: missing {what}")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {line_no}: bad {what}: {e}")))
        };
        xs.push(parse(cols.next(), "x")?);
        vals.push(parse(cols.next(), "value")?);
    }
    if xs.len() < 2 {
        return Err(Error::Parse("profile has fewer than two rows".into()));
    }
    let n = xs.len();
    let h = xs[1] - xs[0];
    let half_length = match meta.iter().find(|(k, _)| k == "L") {
        Some((_, v)) => v
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("bad L in header: {e}")))?,
        None => 0.5 * h * n as f64,
    };
    let grid = Grid::new(half_length, n)?;
    let tol = 1e-9 * grid.spacing();
    if let Some((j, x)) = xs.iter().enumerate().find(|(j, x)| (*x - grid.x(*j)).abs() > tol) {
        return Err(Error::Parse(format!(
            "row {}: x = {x} is not on the grid (expected {})",
            j + 1,
            grid.x(j)
        )));
    }
    Ok(StoredProfile {
        field: SpectralField::from_values(grid, vals)?,
        meta,
    })
}

pub fn read_profile(path: &Path) -> Result<StoredProfile> {
    parse_profile(&fs::read_to_string(path)?)
}

/// Kernel table as `x,value,regular_part,singular_part`.
pub fn kernel_csv(table: &KernelTable) -> String {
    let g = table.grid();
    let mut meta = grid_meta(g);
    meta.push(("kernel", table.label().to_string()));
    meta.push(("origin_singularity", table.origin_singularity().to_string()));
    meta.push(("origin_finite_part", table.origin_finite_part().to_string()));
    meta.push(("fitted_tail_rate", table.fitted_tail_rate().to_string()));
    let mut s = header("whitham-kernel", &meta, "x,value,regular_part,singular_part");
    for j in 0..g.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            g.x(j),
            table.value(j),
            table.regular_part()[j],
            table.singular_part()[j]
        );
    }
    s
}

/// Trajectory in long format `t,x,u`.
pub fn trajectory_csv(frames: &[Snapshot]) -> String {
    trajectory_csv_strided(frames, 1)
}

/// Trajectory keeping every `stride`-th grid point of each frame.
pub fn trajectory_csv_strided(frames: &[Snapshot], stride: usize) -> String {
    let stride = stride.max(1);
    let mut meta = frames.first().map(|f| grid_meta(f.u.grid())).unwrap_or_default();
    if stride > 1 {
        meta.push(("stride", stride.to_string()));
    }
    let mut s = header("whitham-trajectory", &meta, "t,x,u");
    for f in frames {
        let g = f.u.grid();
        for j in (0..g.len()).step_by(stride) {
            let _ = writeln!(s, "{},{},{}", f.t, g.x(j), f.u.values()[j]);
        }
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub half_length: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshots: usize,
    pub mass_drift: f64,
    pub momentum_drift: f64,
}

impl RunManifest {
    pub fn new(state: &EvolutionState, frames: &[Snapshot], dt: f64) -> Self {
        let g = state.u.grid();
        Self {
            half_length: g.half_length(),
            n: g.len(),
            dt,
            t_end: state.t,
            snapshots: frames.len(),
            mass_drift: state.mass_drift(),
            momentum_drift: state.momentum_drift(),
        }
    }
}

/// One row of a batch summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRow {
    pub c: f64,
    pub sup_phi: f64,
    pub nu: f64,
    pub delta_c: f64,
    pub reflection_error: f64,
    pub crest_count: usize,
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = header(
        "whitham-summary",
        &[],
        "c,sup_phi,nu,delta_c,reflection_error,crest_count",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.c, r.sup_phi, r.nu, r.delta_c, r.reflection_error, r.crest_count
        );
    }
    s
}
