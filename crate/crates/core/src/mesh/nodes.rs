//! Global node numbering with hanging mid-edge and face-center nodes.

use std::collections::{HashMap, HashSet};

use super::{balance::check_balance, OctreeMesh};
use crate::error::Result;
use crate::pattern::canonical::{canonical_mask, canonicalize};
use crate::pattern::transform::transform;
use crate::topology::{face_flags, present_slots, EDGE_SLOT0, N_EDGES, SLOTS};

type Key = [u64; 3];

fn slot_key(anchor: [u32; 3], level: u8, depth: u8, slot: usize) -> Key {
    let half = 1u64 << (depth - level);
    let h = SLOTS[slot];
    [0, 1, 2].map(|a| anchor[a] as u64 * 2 * half + h[a] as u64 * half)
}

/// Numbers nodes, fills edge masks and pattern ids. Nodes are sorted by
/// `(z, y, x)`; cell node lists follow the master-local order of each
/// cell's canonical pattern.
pub fn enumerate_nodes(mesh: &OctreeMesh) -> Result<OctreeMesh> {
    check_balance(mesh)?;
    let depth = mesh.depth();
    let mut corners: HashSet<Key> = HashSet::new();
    for c in &mesh.cells {
        for s in 0..8 {
            corners.insert(slot_key(c.anchor, c.level, depth, s));
        }
    }
    let masks: Vec<u16> = mesh
        .cells
        .iter()
        .map(|c| {
            (0..N_EDGES)
                .filter(|&e| corners.contains(&slot_key(c.anchor, c.level, depth, EDGE_SLOT0 + e)))
                .fold(0u16, |m, e| m | (1 << e))
        })
        .collect();

    let mut keys: Vec<Key> = Vec::new();
    let mut seen: HashSet<Key> = HashSet::new();
    let mut cell_slots: Vec<Vec<(usize, Key)>> = Vec::with_capacity(mesh.cells.len());
    for (c, &mask) in mesh.cells.iter().zip(&masks) {
        let slots: Vec<(usize, Key)> =
            present_slots(mask).into_iter().map(|s| (s, slot_key(c.anchor, c.level, depth, s))).collect();
        for &(_, k) in &slots {
            if seen.insert(k) {
                keys.push(k);
            }
        }
        cell_slots.push(slots);
    }
    keys.sort_unstable_by_key(|k| (k[2], k[1], k[0]));
    let id_of: HashMap<Key, u32> = keys.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
    let unit = mesh.root_size / (1u64 << (depth + 1)) as f64;
    let nodes = keys.iter().map(|k| [0, 1, 2].map(|a| mesh.root_origin[a] + k[a] as f64 * unit)).collect();

    let mut out = mesh.clone();
    out.nodes = nodes;
    out.cell_nodes = Vec::with_capacity(mesh.cells.len());
    for ((cell, &mask), slots) in out.cells.iter_mut().zip(&masks).zip(&cell_slots) {
        let (cid, tid) = canonicalize(mask);
        cell.edge_mask = mask;
        cell.canonical_id = cid;
        cell.transform_id = tid;
        let back = transform(tid).transpose();
        let by_slot: HashMap<usize, Key> = slots.iter().copied().collect();
        let ids = present_slots(canonical_mask(cid))
            .into_iter()
            .map(|j| id_of[&by_slot[&(back.node_perm[j] as usize)]])
            .collect();
        out.cell_nodes.push(ids);
    }
    Ok(out)
}

/// Faces of a cell carrying a center node.
pub fn face_centers(mask: u16) -> Vec<usize> {
    (0..6).filter(|&f| face_flags(mask, f).iter().any(|&b| b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::mesh::{balance_octree, Leaf};

    fn mats() -> MaterialTable {
        MaterialTable::single(Material::new(1.0, 0.3, 1.0).unwrap())
    }

    #[test]
    fn two_cubes_share_four_nodes() {
        let mesh = OctreeMesh::uniform_box([2, 1, 1], 1.0, mats());
        let m = enumerate_nodes(&mesh).unwrap();
        assert_eq!(m.nodes.len(), 12);
        assert!(m.cells.iter().all(|c| c.edge_mask == 0 && c.canonical_id == 1));
    }

    #[test]
    fn uniform_two_cubed_has_27_nodes() {
        let m = enumerate_nodes(&OctreeMesh::uniform_box([2, 2, 2], 0.5, mats())).unwrap();
        assert_eq!(m.nodes.len(), 27);
        assert!(m.cells.iter().all(|c| c.edge_mask == 0));
    }

    #[test]
    fn big_cube_next_to_four_small_has_center_node() {
        // level-1 cell at x in [0, .5] with four level-2 cells on its +x face
        let mut leaves = vec![Leaf { level: 1, anchor: [0, 0, 0], material: 1 }];
        for j in 0..2 {
            for k in 0..2 {
                leaves.push(Leaf { level: 2, anchor: [2, j, k], material: 1 });
            }
        }
        let m = enumerate_nodes(&OctreeMesh::from_leaves([0.0; 3], 1.0, leaves, mats())).unwrap();
        let big = m.cells.iter().position(|c| c.level == 1).unwrap();
        let mask = m.cells[big].edge_mask;
        assert_eq!(face_flags(mask, 1), [true; 4]);
        // the four side faces each carry one mid-edge node, so they are fanned too
        assert_eq!(face_centers(mask), vec![1, 2, 3, 4, 5]);
        assert_eq!(m.cell_nodes[big].len(), 8 + 4 + 5);
        // face center at (0.5, 0.25, 0.25) is shared by all four small cells
        let fc = m.nodes.iter().position(|p| *p == [0.5, 0.25, 0.25]).unwrap() as u32;
        assert_eq!(m.cell_nodes.iter().filter(|ids| ids.contains(&fc)).count(), 5);
    }

    #[test]
    fn unbalanced_input_rejected() {
        let mut leaves = vec![Leaf { level: 1, anchor: [0, 0, 0], material: 1 }];
        for j in 0..4u32 {
            for k in 0..4u32 {
                leaves.push(Leaf { level: 3, anchor: [4, j, k], material: 1 });
            }
        }
        let mesh = OctreeMesh::from_leaves([0.0; 3], 1.0, leaves, mats());
        assert!(enumerate_nodes(&mesh).is_err());
        assert!(enumerate_nodes(&balance_octree(&mesh)).is_ok());
    }

    #[test]
    fn node_coordinates_are_unique_and_pattern_ids_reproduce_masks() {
        let mut leaves = Vec::new();
        for c in 0..8u32 {
            let a = [c & 1, (c >> 1) & 1, c >> 2];
            if c == 0 || c == 6 {
                for q in 0..8u32 {
                    leaves.push(Leaf {
                        level: 2,
                        anchor: [2 * a[0] + (q & 1), 2 * a[1] + ((q >> 1) & 1), 2 * a[2] + (q >> 2)],
                        material: 1,
                    });
                }
            } else {
                leaves.push(Leaf { level: 1, anchor: a, material: 1 });
            }
        }
        let m = enumerate_nodes(&OctreeMesh::from_leaves([0.0; 3], 2.0, leaves, mats())).unwrap();
        let set: HashSet<[u64; 3]> = m.nodes.iter().map(|p| p.map(f64::to_bits)).collect();
        assert_eq!(set.len(), m.nodes.len());
        for c in &m.cells {
            assert_eq!(crate::pattern::canonical::decanonicalize(c.canonical_id, c.transform_id), c.edge_mask);
        }
        // every cell's master-order nodes sit at the transformed slot positions
        for (i, c) in m.cells.iter().enumerate() {
            let back = transform(c.transform_id).transpose();
            for (j, &slot) in present_slots(canonical_mask(c.canonical_id)).iter().enumerate() {
                let h = SLOTS[back.node_perm[slot] as usize];
                let p = m.nodes[m.cell_nodes[i][j] as usize];
                for a in 0..3 {
                    assert_eq!(p[a], c.origin[a] + h[a] as f64 * 0.5 * c.size);
                }
            }
        }
    }
}
