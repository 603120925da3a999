//! File formats: mesh files, run configs, probe CSVs, VTK snapshots, the
//! results container and partition/timing reports.

pub mod config;
pub mod csv;
pub mod meshfile;
pub mod report;
pub mod results;
pub mod vtk;

use std::path::{Path, PathBuf};

use crate::error::{format_err, Result};

pub use config::{FixedSpec, MeshSource, ProbeSpec, RunConfig, TractionSpec};
pub use csv::{parse_probe_csv, probe_csv, probe_file_name, write_probe_files, PROBE_HEADER};
pub use meshfile::{decode_mesh, encode_mesh, read_mesh, write_mesh};
pub use report::{partition_json, timing_csv, timing_table, PartitionFile};
pub use results::{decode_results, encode_results, read_results, write_results, Results};
pub use vtk::{corner_node_set, parse_vtk, write_vtk, VtkGrid};

/// Overrides the configured output directory.
pub const ENV_OUTPUT_DIR: &str = "OCTSBFEM_OUTPUT_DIR";
/// Overrides the configured worker backend (`sim` or `proc`).
pub const ENV_BACKEND: &str = "OCTSBFEM_BACKEND";

/// Environment override first, then the configured directory.
pub fn output_dir(configured: &Path) -> PathBuf {
    match std::env::var_os(ENV_OUTPUT_DIR) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.to_path_buf(),
    }
}

/// Bounds-checked little-endian reader for the binary formats.
pub(crate) struct ByteReader<'a> {
    data: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(data: &'a [u8], what: &'static str) -> Self {
        Self { data, pos: 0, what }
    }

    pub(crate) fn fail(&self, reason: impl Into<String>) -> crate::Error {
        format_err(self.what, reason)
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| self.fail(format!("truncated at byte {}", self.pos)))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// A count that must fit in the remaining bytes at `min_size` each,
    /// so corrupt headers cannot trigger huge allocations.
    pub(crate) fn count(&mut self, min_size: usize) -> Result<usize> {
        let n = self.u32()? as usize;
        if n.saturating_mul(min_size) > self.data.len() - self.pos {
            return Err(self.fail(format!("count {n} exceeds remaining data")));
        }
        Ok(n)
    }

    /// Fails unless `n` more bytes are available.
    pub(crate) fn count_remaining(&self, n: usize) -> Result<()> {
        if n > self.data.len() - self.pos {
            return Err(self.fail("truncated"));
        }
        Ok(())
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(self.fail("trailing bytes"));
        }
        Ok(())
    }
}
