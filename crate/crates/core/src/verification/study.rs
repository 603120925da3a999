//! Modal study of the roller-supported cube.

use super::cube::{modal_error, CubeSpec};
use super::meshes::{cube_mesh, CubeMeshType};
use super::modal::{lowest_frequencies, MassOperator};
use super::sparse::{assemble, free_dof_map, Operator};
use crate::assembly::{build_solver_tables, fix_plane, Plane};
use crate::error::Result;
use crate::material::Material;
use crate::mesh::OctreeMesh;
use crate::pattern::PatternCatalog;

#[derive(Debug, Clone, PartialEq)]
pub struct ModalResult {
    pub n_dof: usize,
    pub lumped: Vec<f64>,
    pub consistent: Vec<f64>,
}

/// Normal displacement fixed on all six faces of `[0, l]³`.
pub fn roller_dofs(mesh: &OctreeMesh, l: f64) -> Vec<u32> {
    let mut fixed = Vec::new();
    for axis in 0..3 {
        let mut comp = [false; 3];
        comp[axis] = true;
        for coord in [0.0, l] {
            fixed.extend(fix_plane(mesh, Plane { axis, coord }, comp));
        }
    }
    fixed.sort_unstable();
    fixed.dedup();
    fixed
}

/// Lowest `count` angular frequencies with lumped and consistent mass.
pub fn cube_modal(mesh: &OctreeMesh, l: f64, count: usize) -> Result<ModalResult> {
    let catalog = PatternCatalog::for_mesh(mesh)?;
    let tables = build_solver_tables(mesh, &catalog)?;
    let fixed = roller_dofs(mesh, l);
    let (free, n_free) = free_dof_map(tables.n_dof, &fixed);
    let mut rho_l3 = Vec::with_capacity(mesh.cells.len());
    for c in &mesh.cells {
        rho_l3.push(mesh.materials.get(c.material)?.rho * c.volume());
    }
    let k = assemble(&tables, &rho_l3, &free, n_free, Operator::Stiffness);
    let mut m_diag = vec![0.0; n_free];
    for (d, f) in free.iter().enumerate() {
        if let Some(f) = f {
            m_diag[*f as usize] = tables.m_diag[d];
        }
    }
    let block = 8;
    let lumped = lowest_frequencies(&k, &MassOperator::Lumped(&m_diag), count, block)?;
    let m = assemble(&tables, &rho_l3, &free, n_free, Operator::ConsistentMass);
    let consistent = lowest_frequencies(&k, &MassOperator::Consistent(&m), count, block)?;
    Ok(ModalResult { n_dof: tables.n_dof, lumped, consistent })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeStudyRow {
    pub mesh_type: usize,
    pub n: u32,
    pub modal: ModalResult,
}

impl CubeStudyRow {
    /// `(lumped, consistent)` errors against `exact`.
    pub fn errors(&self, exact: &[f64]) -> Result<(f64, f64)> {
        Ok((modal_error(&self.modal.lumped, exact)?, modal_error(&self.modal.consistent, exact)?))
    }
}

/// Lowest `count` frequencies on `n × n × n` base cells for each `n`.
pub fn cube_study(spec: &CubeSpec, kind: CubeMeshType, divisions: &[u32], count: usize) -> Result<Vec<CubeStudyRow>> {
    let material = Material::new(spec.e, spec.nu, spec.rho)?;
    divisions
        .iter()
        .map(|&n| {
            let mesh = cube_mesh(kind, n, spec.l, material)?;
            Ok(CubeStudyRow { mesh_type: kind.index(), n, modal: cube_modal(&mesh, spec.l, count)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verification::modal::dense_frequencies;

    #[test]
    fn lanczos_matches_dense_solve() {
        let mat = Material::new(1000.0, 0.3, 1.0).unwrap();
        let mesh = cube_mesh(CubeMeshType::Checkerboard, 2, 8.0, mat).unwrap();
        let catalog = PatternCatalog::for_mesh(&mesh).unwrap();
        let tables = build_solver_tables(&mesh, &catalog).unwrap();
        let fixed = roller_dofs(&mesh, 8.0);
        let (free, n_free) = free_dof_map(tables.n_dof, &fixed);
        let rho_l3: Vec<f64> = mesh.cells.iter().map(|c| c.volume()).collect();
        let k = assemble(&tables, &rho_l3, &free, n_free, Operator::Stiffness);
        let m = assemble(&tables, &rho_l3, &free, n_free, Operator::ConsistentMass);
        let dense = dense_frequencies(&k.to_dense(), &m.to_dense(), 20).unwrap();
        let lanczos = crate::verification::modal::lanczos(&k, &MassOperator::Consistent(&m), 20, 4).unwrap();
        for (a, b) in lanczos.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
        let mut md = nalgebra::DMatrix::zeros(n_free, n_free);
        for (d, f) in free.iter().enumerate() {
            if let Some(f) = f {
                md[(*f as usize, *f as usize)] = tables.m_diag[d];
            }
        }
        let dense = dense_frequencies(&k.to_dense(), &md, 20).unwrap();
        let diag: Vec<f64> = (0..n_free).map(|i| md[(i, i)]).collect();
        let lanczos = crate::verification::modal::lanczos(&k, &MassOperator::Lumped(&diag), 20, 4).unwrap();
        for (a, b) in lanczos.iter().zip(&dense) {
            assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn assembled_stiffness_is_symmetric() {
        let mat = Material::new(1000.0, 0.3, 1.0).unwrap();
        let mesh = cube_mesh(CubeMeshType::Layered, 2, 8.0, mat).unwrap();
        let catalog = PatternCatalog::for_mesh(&mesh).unwrap();
        let tables = build_solver_tables(&mesh, &catalog).unwrap();
        let (free, n) = free_dof_map(tables.n_dof, &[]);
        let k = assemble(&tables, &vec![1.0; mesh.cells.len()], &free, n, Operator::Stiffness).to_dense();
        assert!((&k - k.transpose()).amax() <= 1e-10 * k.amax());
    }
}
