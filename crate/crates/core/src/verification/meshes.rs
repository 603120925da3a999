//! Verification meshes: the three cube refinement patterns, the beam and a
//! three-material demo.

use crate::error::{invalid, Result};
use crate::material::{Material, MaterialTable};
use crate::mesh::{balance_octree, enumerate_nodes, Leaf, OctreeMesh};

/// How a cube of `n³` base cells is refined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeMeshType {
    /// Uniform cells, only the conforming pattern.
    Uniform,
    /// Every other cell in a 3D checkerboard is split into eight.
    Checkerboard,
    /// Base layers along z alternate between split and unsplit.
    Layered,
}

impl CubeMeshType {
    pub const ALL: [CubeMeshType; 3] = [CubeMeshType::Uniform, CubeMeshType::Checkerboard, CubeMeshType::Layered];

    pub fn index(self) -> usize {
        self as usize + 1
    }

    fn split(self, i: u32, j: u32, k: u32) -> bool {
        match self {
            CubeMeshType::Uniform => false,
            CubeMeshType::Checkerboard => (i + j + k) % 2 == 0,
            CubeMeshType::Layered => k % 2 == 0,
        }
    }
}

/// Level-`level + 1` children of base cell `(i, j, k)`.
fn children(i: u32, j: u32, k: u32, level: u8, material: u16) -> impl Iterator<Item = Leaf> {
    (0..8u32).map(move |c| Leaf {
        level: level + 1,
        anchor: [2 * i + (c & 1), 2 * j + ((c >> 1) & 1), 2 * k + (c >> 2)],
        material,
    })
}

fn root_level(n: u32) -> u8 {
    (32 - (n.max(2) - 1).leading_zeros()) as u8
}

/// Cube `[0, l]³` with `n` base cells per edge. The root is the smallest
/// power-of-two multiple of the base cell that covers the cube.
pub fn cube_mesh(kind: CubeMeshType, n: u32, l: f64, material: Material) -> Result<OctreeMesh> {
    if n == 0 {
        return Err(invalid("cube mesh needs at least one cell per edge"));
    }
    let level = root_level(n);
    let h = l / n as f64;
    let mut leaves = Vec::new();
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                if kind.split(i, j, k) {
                    leaves.extend(children(i, j, k, level, 1));
                } else {
                    leaves.push(Leaf { level, anchor: [i, j, k], material: 1 });
                }
            }
        }
    }
    let mesh = OctreeMesh::from_leaves([0.0; 3], h * (1u64 << level) as f64, leaves, MaterialTable::single(material));
    enumerate_nodes(&balance_octree(&mesh))
}

/// Beam `[0, len] × [0, 1] × [0, 1]` of cubic cells of edge `1 / per_unit`,
/// uniform or with the cube refinement patterns applied.
pub fn beam_mesh(kind: CubeMeshType, len: u32, per_unit: u32, material: Material) -> Result<OctreeMesh> {
    if len == 0 || per_unit == 0 {
        return Err(invalid("beam mesh needs positive dimensions"));
    }
    let nx = len * per_unit;
    let level = root_level(nx);
    let h = 1.0 / per_unit as f64;
    let mut leaves = Vec::new();
    for k in 0..per_unit {
        for j in 0..per_unit {
            for i in 0..nx {
                if kind.split(i, j, k) {
                    leaves.extend(children(i, j, k, level, 1));
                } else {
                    leaves.push(Leaf { level, anchor: [i, j, k], material: 1 });
                }
            }
        }
    }
    let mesh = OctreeMesh::from_leaves([0.0; 3], h * (1u64 << level) as f64, leaves, MaterialTable::single(material));
    enumerate_nodes(&balance_octree(&mesh))
}

/// Three materials in an 8×4×4 slab: a stiff inclusion refined two levels,
/// a soft layer and the matrix.
pub fn three_material_demo() -> Result<OctreeMesh> {
    let mut mats = MaterialTable::single(Material::new(1000.0, 0.3, 1.0)?);
    mats.insert(2, Material::new(4000.0, 0.25, 2.0)?)?;
    mats.insert(3, Material::new(300.0, 0.3, 0.8)?)?;
    let mut leaves = Vec::new();
    for k in 0..4u32 {
        for j in 0..4u32 {
            for i in 0..8u32 {
                let material = if k == 0 { 3 } else { 1 };
                if (2..4).contains(&i) && (1..3).contains(&j) && (1..3).contains(&k) {
                    for c in children(i, j, k, 3, 2) {
                        if c.anchor == [2 * i + 1, 2 * j + 1, 2 * k + 1] {
                            leaves.extend(children(c.anchor[0], c.anchor[1], c.anchor[2], 4, 2));
                        } else {
                            leaves.push(c);
                        }
                    }
                } else {
                    leaves.push(Leaf { level: 3, anchor: [i, j, k], material });
                }
            }
        }
    }
    enumerate_nodes(&balance_octree(&OctreeMesh::from_leaves([0.0; 3], 8.0, leaves, mats)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::is_balanced;

    fn mat() -> Material {
        Material::new(1000.0, 0.3, 1.0).unwrap()
    }

    #[test]
    fn cube_meshes_fill_the_cube() {
        for kind in CubeMeshType::ALL {
            let m = cube_mesh(kind, 4, 8.0, mat()).unwrap();
            assert!((m.volume() - 512.0).abs() < 1e-9);
            assert!(is_balanced(&m));
            let max = m.nodes.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
            assert!((max - 8.0).abs() < 1e-12);
        }
        assert_eq!(cube_mesh(CubeMeshType::Uniform, 3, 8.0, mat()).unwrap().nodes.len(), 64);
    }

    #[test]
    fn refined_types_use_hanging_patterns() {
        for kind in [CubeMeshType::Checkerboard, CubeMeshType::Layered] {
            let m = cube_mesh(kind, 4, 8.0, mat()).unwrap();
            assert!(m.cells.iter().any(|c| c.edge_mask != 0));
        }
    }

    #[test]
    fn beam_and_demo_are_balanced() {
        let b = beam_mesh(CubeMeshType::Uniform, 16, 2, mat()).unwrap();
        assert_eq!(b.cells.len(), 16 * 2 * 4);
        assert!((b.volume() - 16.0).abs() < 1e-9);
        let d = three_material_demo().unwrap();
        assert!(is_balanced(&d));
        let used: std::collections::BTreeSet<u16> = d.cells.iter().map(|c| c.material).collect();
        assert_eq!(used.len(), 3);
        assert!((d.volume() - 128.0).abs() < 1e-9);
    }
}
