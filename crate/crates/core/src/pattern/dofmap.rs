//! Signed maps between global DOFs and master-cell DOF order.

use super::transform::transform;
use crate::error::{invalid, Result};
use crate::mesh::OctreeMesh;

/// Master DOF `i` reads `sign[i] * U[dofs[i]]`; forces scatter back with the
/// same pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementDofMap {
    pub element: usize,
    pub dofs: Vec<u32>,
    pub signs: Vec<i8>,
}

impl ElementDofMap {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn gather(&self, u: &[f64], out: &mut [f64]) {
        for ((o, &d), &s) in out.iter_mut().zip(&self.dofs).zip(&self.signs) {
            *o = s as f64 * u[d as usize];
        }
    }

    pub fn scatter_add(&self, f: &[f64], r: &mut [f64]) {
        for ((&v, &d), &s) in f.iter().zip(&self.dofs).zip(&self.signs) {
            r[d as usize] += s as f64 * v;
        }
    }
}

pub fn element_dof_map(mesh: &OctreeMesh, cell: usize) -> Result<ElementDofMap> {
    let c = mesh.cells.get(cell).ok_or_else(|| invalid(format!("cell {cell} out of range")))?;
    let ids = mesh.cell_nodes.get(cell).ok_or_else(|| invalid(format!("cell {cell} has no node ids")))?;
    let t = transform(c.transform_id);
    let mut dofs = Vec::with_capacity(3 * ids.len());
    let mut signs = Vec::with_capacity(3 * ids.len());
    for &n in ids {
        if n as usize >= mesh.nodes.len() {
            return Err(invalid(format!("cell {cell} references missing node {n}")));
        }
        for a in 0..3 {
            dofs.push(3 * n + t.component[a] as u32);
            signs.push(t.sign[a]);
        }
    }
    Ok(ElementDofMap { element: cell, dofs, signs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::mesh::{enumerate_nodes, Leaf};
    use crate::pattern::canonical::canonical_mask;
    use crate::pattern::catalog::build_master_cell;
    use crate::pattern::transform::transforms48;
    use crate::sbfem::{build_element, CellGeometry};
    use crate::topology::present_slots;
    use nalgebra::DMatrix;

    fn mats() -> MaterialTable {
        MaterialTable::single(Material::new(1.0, 0.3, 1.0).unwrap())
    }

    /// Mesh whose cell 0 (at origin) has a varied hanging-edge pattern.
    fn mixed_mesh() -> crate::mesh::OctreeMesh {
        let mut leaves = Vec::new();
        for c in 0..8u32 {
            let a = [c & 1, (c >> 1) & 1, c >> 2];
            if c == 3 || c == 5 {
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
        enumerate_nodes(&crate::mesh::OctreeMesh::from_leaves([0.0; 3], 2.0, leaves, mats())).unwrap()
    }

    #[test]
    fn identity_is_plain_ordering() {
        let mesh = enumerate_nodes(&crate::mesh::OctreeMesh::uniform_box([2, 1, 1], 1.0, mats())).unwrap();
        let m = element_dof_map(&mesh, 0).unwrap();
        assert!(m.signs.iter().all(|&s| s == 1));
        for (i, &d) in m.dofs.iter().enumerate() {
            assert_eq!(d as usize % 3, i % 3);
        }
    }

    #[test]
    fn mirror_x_flips_x_components() {
        let rx = transforms48().iter().find(|t| t.matrix == [[-1, 0, 0], [0, 1, 0], [0, 0, 1]]).unwrap();
        assert_eq!(rx.sign, [-1, 1, 1]);
        assert_eq!(rx.component, [0, 1, 2]);
        // corner 0 (0,0,0) is mirrored onto corner 1 (2,0,0)
        assert_eq!(rx.node_perm[0], 1);
    }

    #[test]
    fn gather_scatter_are_adjoint_and_invertible() {
        let mesh = mixed_mesh();
        for cell in 0..mesh.cells.len() {
            let m = element_dof_map(&mesh, cell).unwrap();
            let u: Vec<f64> = (0..mesh.n_dof()).map(|i| (i as f64 * 0.37).sin()).collect();
            let mut g = vec![0.0; m.len()];
            m.gather(&u, &mut g);
            let mut back = vec![0.0; mesh.n_dof()];
            m.scatter_add(&g, &mut back);
            for (i, &d) in m.dofs.iter().enumerate() {
                assert_eq!(back[d as usize], u[d as usize], "dof {i}");
            }
        }
    }

    #[test]
    fn mapped_master_equals_in_place_build() {
        let mesh = mixed_mesh();
        for cell in 0..mesh.cells.len() {
            let c = &mesh.cells[cell];
            let master = build_master_cell(c.canonical_id, 0.3).unwrap();
            let t = transform(c.transform_id);
            // element stiffness built directly on the actual slot layout, ordered by actual slot
            let geom = CellGeometry::cube(c.edge_mask, 1.0);
            let direct = build_element(&geom, &Material::new(1.0, 0.3, 1.0).unwrap(), cell).unwrap().k;
            let actual = present_slots(c.edge_mask);
            let back = t.transpose();
            let local: Vec<usize> = present_slots(canonical_mask(c.canonical_id))
                .iter()
                .map(|&j| actual.iter().position(|&s| s == back.node_perm[j] as usize).unwrap())
                .collect();
            let n = master.n_dof();
            let mut mapped = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let (ri, ai) = (3 * local[i / 3] + t.component[i % 3] as usize, t.sign[i % 3] as f64);
                    let (rj, aj) = (3 * local[j / 3] + t.component[j % 3] as usize, t.sign[j % 3] as f64);
                    mapped[(ri, rj)] = ai * aj * master.k[(i, j)];
                }
            }
            assert!((&mapped - &direct).norm() <= 1e-10 * direct.norm(), "cell {cell}");
        }
    }
}
