//! Versioned binary cache of master cells.
//!
//! Layout, little-endian: `b"SBMC"`, version `u32`, tessellation rule `u32`,
//! entry count `u32`; per entry: canonical id `u8`, quantized ν `i64`
//! (`round(ν·1e9)`), ν `f64`, edge mask `u16`, DOF count `u32`, `ω_max f64`,
//! then `K`, consistent mass (row-major `f64`) and lumped mass.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::canonical::canonical_mask;
use super::catalog::{MasterCell, PatternCatalog};
use crate::error::{format_err, Result};
use crate::io::ByteReader;
use crate::material::nu_key;
use crate::topology::{present_slots, SLOTS};

pub const MAGIC: &[u8; 4] = b"SBMC";
pub const VERSION: u32 = 1;
/// Bumped whenever the face tessellation or quadrature changes.
pub const TESSELLATION_RULE: u32 = 1;

pub fn encode(catalog: &PatternCatalog) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&TESSELLATION_RULE.to_le_bytes());
    out.extend_from_slice(&(catalog.len() as u32).to_le_bytes());
    for m in catalog.iter() {
        out.push(m.canonical_id);
        out.extend_from_slice(&nu_key(m.nu).to_le_bytes());
        out.extend_from_slice(&m.nu.to_le_bytes());
        out.extend_from_slice(&m.edge_mask.to_le_bytes());
        let n = m.n_dof();
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.extend_from_slice(&m.omega_max.to_le_bytes());
        for mat in [&m.k, &m.m_cons] {
            for i in 0..n {
                for j in 0..n {
                    out.extend_from_slice(&mat[(i, j)].to_le_bytes());
                }
            }
        }
        for v in m.m_diag.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(data: &[u8]) -> Result<PatternCatalog> {
    let mut c = ByteReader::new(data, "cache file");
    if c.take(4)? != MAGIC {
        return Err(format_err("cache file", "bad magic"));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(format_err("cache file", format!("unsupported version {version}")));
    }
    let rule = c.u32()?;
    if rule != TESSELLATION_RULE {
        return Err(format_err("cache file", format!("stale tessellation rule {rule}")));
    }
    let count = c.count(1)?;
    let mut cat = PatternCatalog::new();
    for _ in 0..count {
        let canonical_id = c.u8()?;
        if !(1..=144).contains(&canonical_id) {
            return Err(format_err("cache file", format!("canonical id {canonical_id} out of range")));
        }
        let key = c.i64()?;
        let nu = c.f64()?;
        if nu_key(nu) != key || !(nu > -1.0 && nu < 0.5) {
            return Err(format_err("cache file", "inconsistent Poisson ratio key"));
        }
        let edge_mask = c.u16()?;
        if edge_mask != canonical_mask(canonical_id) {
            return Err(format_err("cache file", "edge mask does not match canonical id"));
        }
        let n = c.u32()? as usize;
        let slots = present_slots(edge_mask);
        if n != 3 * slots.len() {
            return Err(format_err("cache file", "DOF count does not match pattern"));
        }
        let omega_max = c.f64()?;
        let mut read_mat = || -> Result<DMatrix<f64>> {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = c.f64()?;
                }
            }
            Ok(m)
        };
        let k = read_mat()?;
        let m_cons = read_mat()?;
        let mut m_diag = DVector::zeros(n);
        for i in 0..n {
            m_diag[i] = c.f64()?;
        }
        let node_layout = slots.iter().map(|&s| SLOTS[s].map(|h| h as f64 * 0.5)).collect();
        cat.insert(MasterCell { canonical_id, edge_mask, nu, node_layout, k, m_cons, m_diag, omega_max });
    }
    c.finish()?;
    Ok(cat)
}

pub fn write(catalog: &PatternCatalog, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(catalog))?;
    Ok(())
}

pub fn read(path: &Path) -> Result<PatternCatalog> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    decode(&buf)
}

/// Load the cache if present and compatible, add missing entries, and
/// rewrite it when anything was built.
pub fn refresh(path: &Path, wanted: &[(u8, f64)]) -> Result<PatternCatalog> {
    let mut cat = match read(path) {
        Ok(c) => c,
        Err(_) => PatternCatalog::new(),
    };
    let before = cat.len();
    cat.ensure(wanted)?;
    if cat.len() != before || !path.exists() {
        write(&cat, path)?;
    }
    Ok(cat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_byte_identical() {
        let mut cat = PatternCatalog::new();
        cat.ensure(&[(1, 0.3), (5, 0.3), (9, 0.0)]).unwrap();
        let bytes = encode(&cat);
        let back = decode(&bytes).unwrap();
        assert_eq!(encode(&back), bytes);
        assert_eq!(back.len(), 3);
        assert_eq!(**back.get(5, 0.3).unwrap(), **cat.get(5, 0.3).unwrap());
    }

    #[test]
    fn rejects_corruption() {
        let mut cat = PatternCatalog::new();
        cat.ensure(&[(1, 0.3)]).unwrap();
        let bytes = encode(&cat);
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode(&bad).is_err());
        let mut stale = bytes.clone();
        stale[8] = 9;
        assert!(decode(&stale).is_err());
        assert!(decode(&[]).is_err());
    }
}
