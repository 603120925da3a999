//! Balanced octree meshes over a cubic root.
//!
//! Cells are addressed by `(level, anchor)` with `anchor` the integer cell
//! index at that level. Nodes live on an integer lattice of spacing
//! `root_size / 2^(depth+1)` so deduplication is exact.

pub mod balance;
pub mod build;
pub mod face;
pub mod nodes;

use serde::{Deserialize, Serialize};

use crate::material::MaterialTable;

pub use balance::{balance_octree, check_balance, is_balanced};
pub use build::{build_octree, BuildCriteria, Geometry, Primitive, PrimitiveSet, RefineRegion, VoxelGrid};
pub use face::{face_discretization, FacePatch, SurfaceKind};
pub use nodes::enumerate_nodes;

pub const MAX_DEPTH: u8 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Leaf {
    pub level: u8,
    pub anchor: [u32; 3],
    pub material: u16,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OctreeCell {
    pub level: u8,
    pub anchor: [u32; 3],
    pub origin: [f64; 3],
    pub size: f64,
    pub material: u16,
    pub edge_mask: u16,
    pub canonical_id: u8,
    pub transform_id: u8,
}

impl OctreeCell {
    pub fn leaf(&self) -> Leaf {
        Leaf { level: self.level, anchor: self.anchor, material: self.material }
    }

    pub fn centroid(&self) -> [f64; 3] {
        self.origin.map(|o| o + 0.5 * self.size)
    }

    pub fn volume(&self) -> f64 {
        self.size.powi(3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OctreeMesh {
    pub root_origin: [f64; 3],
    pub root_size: f64,
    pub cells: Vec<OctreeCell>,
    /// Empty until [`enumerate_nodes`] has run.
    pub nodes: Vec<[f64; 3]>,
    /// Per cell, global node ids in master-local order.
    pub cell_nodes: Vec<Vec<u32>>,
    pub materials: MaterialTable,
}

impl OctreeMesh {
    /// Unnumbered mesh from explicit leaves, sorted in Morton order.
    pub fn from_leaves(root_origin: [f64; 3], root_size: f64, leaves: Vec<Leaf>, materials: MaterialTable) -> Self {
        let mut leaves = leaves;
        let depth = leaves.iter().map(|l| l.level).max().unwrap_or(0);
        leaves.sort_by_key(|l| (morton_key(l, depth), l.level));
        let cells = leaves
            .into_iter()
            .map(|l| {
                let size = root_size / (1u64 << l.level) as f64;
                OctreeCell {
                    level: l.level,
                    anchor: l.anchor,
                    origin: [0, 1, 2].map(|a| root_origin[a] + l.anchor[a] as f64 * size),
                    size,
                    material: l.material,
                    edge_mask: 0,
                    canonical_id: 0,
                    transform_id: 0,
                }
            })
            .collect();
        Self { root_origin, root_size, cells, nodes: Vec::new(), cell_nodes: Vec::new(), materials }
    }

    /// Box of `n[0] × n[1] × n[2]` cells of edge `h`, all of material 1,
    /// inside the smallest power-of-two root that holds it.
    pub fn uniform_box(n: [u32; 3], h: f64, materials: MaterialTable) -> Self {
        let span = *n.iter().max().unwrap();
        let level = 32 - (span.max(1) - 1).leading_zeros();
        let level = if span == 1 { 0 } else { level } as u8;
        let root = h * (1u64 << level) as f64;
        let mut leaves = Vec::new();
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    leaves.push(Leaf { level, anchor: [i, j, k], material: 1 });
                }
            }
        }
        Self::from_leaves([0.0; 3], root, leaves, materials)
    }

    pub fn leaves(&self) -> Vec<Leaf> {
        self.cells.iter().map(OctreeCell::leaf).collect()
    }

    pub fn depth(&self) -> u8 {
        self.cells.iter().map(|c| c.level).max().unwrap_or(0)
    }

    pub fn is_numbered(&self) -> bool {
        !self.cell_nodes.is_empty() || self.cells.is_empty()
    }

    pub fn n_dof(&self) -> usize {
        3 * self.nodes.len()
    }

    pub fn volume(&self) -> f64 {
        self.cells.iter().map(OctreeCell::volume).sum()
    }

    /// Index of the node nearest to `p`.
    pub fn nearest_node(&self, p: [f64; 3]) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, q)| (i, (0..3).map(|a| (q[a] - p[a]).powi(2)).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }

    /// Global node id of each of the 26 slots of a numbered cell.
    pub fn slot_nodes(&self, cell: usize) -> [Option<u32>; crate::topology::N_SLOTS] {
        let c = &self.cells[cell];
        let back = crate::pattern::transform::transform(c.transform_id).transpose();
        let master = crate::topology::present_slots(crate::pattern::canonical::canonical_mask(c.canonical_id));
        let mut out = [None; crate::topology::N_SLOTS];
        for (j, &slot) in master.iter().enumerate() {
            out[back.node_perm[slot] as usize] = Some(self.cell_nodes[cell][j]);
        }
        out
    }

    /// Corner node ids of a numbered cell in slot order `0..8`.
    pub fn corner_nodes(&self, cell: usize) -> [u32; 8] {
        let s = self.slot_nodes(cell);
        std::array::from_fn(|i| s[i].expect("corner nodes always exist"))
    }
}

/// Interleaved-bit key of the cell's lowest corner at lattice depth `depth`.
pub fn morton_key(l: &Leaf, depth: u8) -> u128 {
    let shift = depth - l.level;
    let p = l.anchor.map(|a| (a as u128) << shift);
    let mut key = 0u128;
    for bit in 0..(depth as usize + 1) {
        for (a, &v) in p.iter().enumerate() {
            key |= ((v >> bit) & 1) << (3 * bit + a);
        }
    }
    key
}
