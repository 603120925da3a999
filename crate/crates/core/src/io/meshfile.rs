//! Octree mesh files.
//!
//! Layout, little-endian: `b"OCTM"`, version `u32`, header length `u32`,
//! a JSON header (root origin and size, materials, cell count), then per
//! cell: level `u8`, anchor `3 × u32`, material `u16`. Nodes are derived on
//! load, so a file holds exactly the leaves.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ByteReader;
use crate::error::{format_err, Result};
use crate::material::MaterialTable;
use crate::mesh::{check_balance, enumerate_nodes, morton_key, Leaf, OctreeMesh, MAX_DEPTH};

pub const MAGIC: &[u8; 4] = b"OCTM";
pub const VERSION: u32 = 1;
const CELL_BYTES: usize = 15;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    root_origin: [f64; 3],
    root_size: f64,
    materials: MaterialTable,
    n_cells: usize,
}

pub fn encode_mesh(mesh: &OctreeMesh) -> Vec<u8> {
    let header = Header {
        root_origin: mesh.root_origin,
        root_size: mesh.root_size,
        materials: mesh.materials.clone(),
        n_cells: mesh.cells.len(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(12 + json.len() + CELL_BYTES * mesh.cells.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for c in &mesh.cells {
        out.push(c.level);
        for a in c.anchor {
            out.extend_from_slice(&a.to_le_bytes());
        }
        out.extend_from_slice(&c.material.to_le_bytes());
    }
    out
}

/// Leaves in canonical order after checking that they tile without overlap.
fn checked_leaves(mut leaves: Vec<Leaf>, materials: &MaterialTable) -> Result<Vec<Leaf>> {
    let depth = leaves.iter().map(|l| l.level).max().unwrap_or(0);
    for l in &leaves {
        if l.level > MAX_DEPTH {
            return Err(format_err("mesh file", format!("level {} above {MAX_DEPTH}", l.level)));
        }
        if l.anchor.iter().any(|&a| (a as u64) >= 1u64 << l.level) {
            return Err(format_err("mesh file", format!("anchor {:?} outside level {}", l.anchor, l.level)));
        }
        materials.get(l.material).map_err(|e| format_err("mesh file", e.to_string()))?;
    }
    leaves.sort_by_key(|l| morton_key(l, depth));
    for w in leaves.windows(2) {
        let span = 1u128 << (3 * (depth - w[0].level) as u32);
        if morton_key(&w[0], depth) + span > morton_key(&w[1], depth) {
            return Err(format_err("mesh file", "overlapping cells"));
        }
    }
    Ok(leaves)
}

/// Unnumbered mesh exactly as stored.
pub fn decode_mesh(data: &[u8]) -> Result<OctreeMesh> {
    let mut r = ByteReader::new(data, "mesh file");
    if r.take(4)? != MAGIC {
        return Err(r.fail("bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.fail(format!("unsupported version {version}")));
    }
    let len = r.u32()? as usize;
    let header: Header = serde_json::from_slice(r.take(len)?).map_err(|e| format_err("mesh file", e.to_string()))?;
    header.materials.validate().map_err(|e| format_err("mesh file", e.to_string()))?;
    if !(header.root_size > 0.0 && header.root_size.is_finite()) || header.root_origin.iter().any(|v| !v.is_finite()) {
        return Err(r.fail("root cube must be finite with positive size"));
    }
    if header.n_cells.saturating_mul(CELL_BYTES) > data.len() {
        return Err(r.fail("cell count exceeds file size"));
    }
    let mut leaves = Vec::with_capacity(header.n_cells);
    for _ in 0..header.n_cells {
        let level = r.u8()?;
        let anchor = [r.u32()?, r.u32()?, r.u32()?];
        let material = r.u16()?;
        leaves.push(Leaf { level, anchor, material });
    }
    r.finish()?;
    let leaves = checked_leaves(leaves, &header.materials)?;
    Ok(OctreeMesh::from_leaves(header.root_origin, header.root_size, leaves, header.materials))
}

pub fn write_mesh(mesh: &OctreeMesh, path: &Path) -> Result<()> {
    std::fs::write(path, encode_mesh(mesh))?;
    Ok(())
}

/// Decoded, balance-checked and numbered mesh ready for assembly.
pub fn read_mesh(path: &Path) -> Result<OctreeMesh> {
    let mesh = decode_mesh(&std::fs::read(path)?)?;
    check_balance(&mesh)?;
    enumerate_nodes(&mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::Material;
    use crate::verification::three_material_demo;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn corrupted_files_are_rejected_cleanly(pos in 0usize..4096, byte in any::<u8>(), cut in 0usize..4096) {
            let mut data = encode_mesh(&three_material_demo().unwrap());
            let pos = pos % data.len();
            data[pos] = byte;
            data.truncate(cut.max(1).min(data.len()));
            let _ = decode_mesh(&data);
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let mesh = three_material_demo().unwrap();
        let bytes = encode_mesh(&mesh);
        let back = decode_mesh(&bytes).unwrap();
        assert_eq!(back.leaves(), mesh.leaves());
        assert_eq!(back.materials, mesh.materials);
        assert_eq!(encode_mesh(&back), bytes);
    }

    #[test]
    fn read_numbers_the_mesh() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.octm");
        let mesh = three_material_demo().unwrap();
        write_mesh(&mesh, &path).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(back.nodes, mesh.nodes);
        assert_eq!(back.cell_nodes, mesh.cell_nodes);
    }

    #[test]
    fn rejects_corruption() {
        let mats = MaterialTable::single(Material::new(1.0, 0.2, 1.0).unwrap());
        let leaf = |level, anchor| Leaf { level, anchor, material: 1 };
        let good = OctreeMesh::from_leaves([0.0; 3], 2.0, vec![leaf(1, [0, 0, 0]), leaf(1, [1, 0, 0])], mats.clone());
        let bytes = encode_mesh(&good);
        assert!(decode_mesh(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(decode_mesh(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(decode_mesh(&magic).is_err());
        // a parent overlapping its own child
        let overlap =
            OctreeMesh::from_leaves([0.0; 3], 2.0, vec![leaf(1, [0, 0, 0]), leaf(2, [1, 1, 1])], mats.clone());
        assert!(decode_mesh(&encode_mesh(&overlap)).is_err());
        let outside = OctreeMesh::from_leaves([0.0; 3], 2.0, vec![leaf(1, [2, 0, 0])], mats.clone());
        assert!(decode_mesh(&encode_mesh(&outside)).is_err());
        let mut unknown = good.clone();
        unknown.cells[0].material = 7;
        assert!(decode_mesh(&encode_mesh(&unknown)).is_err());
    }
}
