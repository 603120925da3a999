//! Run results: snapshots of corner-node displacements and probe histories.
//!
//! Layout, little-endian: `b"SBRS"`, version `u32`, `Δt f64`, node count
//! `u32` and node ids `u32`, snapshot count `u32`; per snapshot: step `u64`,
//! time `f64`, `3 × nodes` displacements `f64`; probe count `u32`; per
//! probe: name length `u16` and UTF-8 bytes, node `u32`, row count `u32`,
//! rows of 7 `f64`.

use std::path::Path;

use super::ByteReader;
use crate::assembly::{ProbeHistory, Snapshot, TransientOutput};
use crate::error::Result;

pub const MAGIC: &[u8; 4] = b"SBRS";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Results {
    pub dt: f64,
    pub snapshot_nodes: Vec<u32>,
    pub output: TransientOutput,
}

impl Results {
    /// Displacement history of one snapshot node as `(t, u)` rows.
    pub fn node_history(&self, node: u32) -> Option<Vec<(f64, [f64; 3])>> {
        let k = self.snapshot_nodes.iter().position(|&n| n == node)?;
        Some(self.output.snapshots.iter().map(|s| (s.time, [0, 1, 2].map(|d| s.displacement[3 * k + d]))).collect())
    }

    pub fn probe(&self, name: &str) -> Option<&ProbeHistory> {
        self.output.probes.iter().find(|p| p.name == name)
    }
}

pub fn encode_results(r: &Results) -> Vec<u8> {
    let mut out = Vec::new();
    let f = |out: &mut Vec<u8>, v: f64| out.extend_from_slice(&v.to_le_bytes());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    f(&mut out, r.dt);
    out.extend_from_slice(&(r.snapshot_nodes.len() as u32).to_le_bytes());
    for n in &r.snapshot_nodes {
        out.extend_from_slice(&n.to_le_bytes());
    }
    out.extend_from_slice(&(r.output.snapshots.len() as u32).to_le_bytes());
    for s in &r.output.snapshots {
        out.extend_from_slice(&(s.step as u64).to_le_bytes());
        f(&mut out, s.time);
        for &v in &s.displacement {
            f(&mut out, v);
        }
    }
    out.extend_from_slice(&(r.output.probes.len() as u32).to_le_bytes());
    for p in &r.output.probes {
        out.extend_from_slice(&(p.name.len() as u16).to_le_bytes());
        out.extend_from_slice(p.name.as_bytes());
        out.extend_from_slice(&p.node.to_le_bytes());
        out.extend_from_slice(&(p.rows.len() as u32).to_le_bytes());
        for row in &p.rows {
            for &v in row {
                f(&mut out, v);
            }
        }
    }
    out
}

pub fn decode_results(data: &[u8]) -> Result<Results> {
    let mut r = ByteReader::new(data, "results file");
    if r.take(4)? != MAGIC {
        return Err(r.fail("bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.fail(format!("unsupported version {version}")));
    }
    let dt = r.f64()?;
    let n_nodes = r.count(4)?;
    let snapshot_nodes = (0..n_nodes).map(|_| r.u32()).collect::<Result<Vec<_>>>()?;
    let n_snap = r.count(16)?;
    let mut snapshots = Vec::with_capacity(n_snap);
    for _ in 0..n_snap {
        let step = usize::try_from(r.u64()?).map_err(|_| r.fail("step out of range"))?;
        let time = r.f64()?;
        if r.count_remaining(24 * n_nodes).is_err() {
            return Err(r.fail("truncated snapshot"));
        }
        let displacement = (0..3 * n_nodes).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        snapshots.push(Snapshot { step, time, displacement });
    }
    let n_probes = r.count(10)?;
    let mut probes = Vec::with_capacity(n_probes);
    for _ in 0..n_probes {
        let len = r.u16()? as usize;
        let name = std::str::from_utf8(r.take(len)?).map_err(|_| r.fail("probe name is not UTF-8"))?.to_string();
        let node = r.u32()?;
        let n_rows = r.count(56)?;
        let mut rows = Vec::with_capacity(n_rows);
        for _ in 0..n_rows {
            let mut row = [0.0; 7];
            for v in row.iter_mut() {
                *v = r.f64()?;
            }
            rows.push(row);
        }
        probes.push(ProbeHistory { name, node, rows });
    }
    r.finish()?;
    Ok(Results { dt, snapshot_nodes, output: TransientOutput { probes, snapshots } })
}

pub fn write_results(r: &Results, path: &Path) -> Result<()> {
    std::fs::write(path, encode_results(r))?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Results> {
    decode_results(&std::fs::read(path)?)
}
