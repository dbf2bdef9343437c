//! Trajectory export: long-format CSV, diagnostics CSV and binary snapshots.
//!
//! Binary snapshot layout (little endian): magic `PPOS1`, `u32` dims, `u32`
//! components, `u64` node count per axis, then `f64` values component-major,
//! nodes in flat order.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::model::Field;

use super::solve::Trajectory;

pub const SNAPSHOT_MAGIC: &[u8; 5] = b"PPOS1";

/// Writes `t, i[, j], component, value` rows for every stored snapshot.
pub fn write_trajectory_csv(path: &Path, times: &[f64], snapshots: &[Field]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let dim = snapshots.first().map_or(1, |f| f.grid().dim());
    if dim == 1 {
        writeln!(w, "t,i,component,value")?;
    } else {
        writeln!(w, "t,i,j,component,value")?;
    }
    for (t, f) in times.iter().zip(snapshots) {
        let g = f.grid();
        for k in 0..f.components() {
            let v = f.component(k);
            for node in 0..g.len() {
                let idx = g.index(node);
                if dim == 1 {
                    writeln!(w, "{t},{},{k},{}", idx[0], v[node])?;
                } else {
                    writeln!(w, "{t},{},{},{k},{}", idx[0], idx[1], v[node])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `t, min_value, sup_norm, negpart_norm, dudt_min, dvdt_max`; the
/// last column refers to the second component (the only one for scalar
/// problems).
pub fn write_diagnostics_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,min_value,sup_norm,negpart_norm,dudt_min,dvdt_max")?;
    for d in &traj.diagnostics {
        let v = d.dt_max.len().min(2) - 1;
        writeln!(
            w,
            "{},{},{},{},{},{}",
            d.t, d.min_value, d.sup_norm, d.negpart_norm, d.dt_min[0], d.dt_max[v]
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn encode_snapshot(field: &Field) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(16 + 8 * (g.dim() + field.components() * g.len()));
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(field.components() as u32).to_le_bytes());
    for &n in g.nodes_per_axis() {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    for k in 0..field.components() {
        for v in field.component(k) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decoded snapshot: node counts per axis and component arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSnapshot {
    pub counts: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<RawSnapshot> {
    let bad = |m: &str| Error::Io(format!("malformed snapshot: {m}"));
    if bytes.len() < 13 || &bytes[..5] != SNAPSHOT_MAGIC {
        return Err(bad("missing magic"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let dims = u32_at(5);
    let m = u32_at(9);
    let mut pos = 13;
    let mut counts = Vec::with_capacity(dims);
    for _ in 0..dims {
        let chunk = bytes.get(pos..pos + 8).ok_or_else(|| bad("truncated header"))?;
        counts.push(u64::from_le_bytes(chunk.try_into().unwrap()) as usize);
        pos += 8;
    }
    let len: usize = counts.iter().product();
    if bytes.len() != pos + 8 * m * len {
        return Err(bad("payload length does not match header"));
    }
    let values = (0..m)
        .map(|k| {
            (0..len)
                .map(|i| {
                    let o = pos + 8 * (k * len + i);
                    f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
                })
                .collect()
        })
        .collect();
    Ok(RawSnapshot { counts, values })
}

pub fn read_snapshot(path: &Path) -> Result<RawSnapshot> {
    let mut buf = Vec::new();
    File::open(path)?.read_to_end(&mut buf)?;
    decode_snapshot(&buf)
}

/// Writes `step_XXXXXX.bin` per snapshot and `times.csv` into `dir`; returns
/// the written paths.
pub fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(traj.snapshots.len() + 1);
    let times_path = dir.join("times.csv");
    let mut tw = BufWriter::new(File::create(&times_path)?);
    writeln!(tw, "step,t,file")?;
    for ((step, t), f) in traj.snapshot_steps.iter().zip(&traj.times).zip(&traj.snapshots) {
        let name = format!("step_{step:06}.bin");
        let path = dir.join(&name);
        fs::write(&path, encode_snapshot(f))?;
        writeln!(tw, "{step},{t},{name}")?;
        written.push(path);
    }
    tw.flush()?;
    written.push(times_path);
    Ok(written)
}
