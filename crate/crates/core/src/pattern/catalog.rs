//! Unit-size master cells per canonical pattern and Poisson ratio.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::canonical::{canonical_mask, n_canonical};
use crate::error::{invalid, Error, Result};
use crate::material::{nu_key, Material};
use crate::mesh::OctreeMesh;
use crate::sbfem::{build_element, CellGeometry};
use crate::topology::{present_slots, SLOTS};

#[derive(Debug, Clone, PartialEq)]
pub struct MasterCell {
    pub canonical_id: u8,
    pub edge_mask: u16,
    pub nu: f64,
    /// Node positions in the unit cube `[0, 1]^3`, master order.
    pub node_layout: Vec<[f64; 3]>,
    /// Stiffness at `E = 1`, `L = 1`.
    pub k: DMatrix<f64>,
    /// Consistent and lumped mass at `ρ = 1`, `L = 1`.
    pub m_cons: DMatrix<f64>,
    pub m_diag: DVector<f64>,
    /// Maximum element frequency at `E = ρ = L = 1`.
    pub omega_max: f64,
}

impl MasterCell {
    pub fn n_dof(&self) -> usize {
        self.k.nrows()
    }
}

pub fn build_master_cell(canonical_id: u8, nu: f64) -> Result<MasterCell> {
    if canonical_id == 0 || canonical_id as usize > n_canonical() {
        return Err(invalid(format!("canonical id {canonical_id} out of range")));
    }
    let mat = Material::new(1.0, nu, 1.0)?;
    let mask = canonical_mask(canonical_id);
    let geom = CellGeometry::cube(mask, 1.0);
    let e = build_element(&geom, &mat, canonical_id as usize).map_err(|err| match err {
        Error::Eigen { reason, .. } => {
            Error::Eigen { cell: canonical_id as usize, reason: format!("master pattern: {reason}") }
        }
        other => other,
    })?;
    let node_layout = present_slots(mask).iter().map(|&s| SLOTS[s].map(|h| h as f64 * 0.5)).collect();
    Ok(MasterCell {
        canonical_id,
        edge_mask: mask,
        nu,
        node_layout,
        k: e.k,
        m_cons: e.m_cons,
        m_diag: e.m_diag,
        omega_max: e.omega_max,
    })
}

pub type CatalogKey = (u8, i64);

/// Immutable-once-built collection of master cells.
#[derive(Debug, Clone, Default)]
pub struct PatternCatalog {
    entries: BTreeMap<CatalogKey, Arc<MasterCell>>,
}

impl PatternCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, canonical_id: u8, nu: f64) -> Result<&Arc<MasterCell>> {
        self.entries.get(&(canonical_id, nu_key(nu))).ok_or(Error::MissingPattern { canonical_id, nu })
    }

    pub fn contains(&self, canonical_id: u8, nu: f64) -> bool {
        self.entries.contains_key(&(canonical_id, nu_key(nu)))
    }

    pub fn insert(&mut self, cell: MasterCell) {
        self.entries.insert((cell.canonical_id, nu_key(cell.nu)), Arc::new(cell));
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<MasterCell>> {
        self.entries.values()
    }

    /// Build any missing entries, independent ids in parallel.
    pub fn ensure(&mut self, wanted: &[(u8, f64)]) -> Result<()> {
        let mut todo: Vec<(u8, f64)> = wanted.iter().copied().filter(|&(c, nu)| !self.contains(c, nu)).collect();
        todo.sort_by_key(|&(c, nu)| (c, nu_key(nu)));
        todo.dedup_by_key(|&mut (c, nu)| (c, nu_key(nu)));
        let built: Vec<Result<MasterCell>> = todo.par_iter().map(|&(c, nu)| build_master_cell(c, nu)).collect();
        for b in built {
            self.insert(b?);
        }
        Ok(())
    }

    pub fn ensure_all(&mut self, nu: f64) -> Result<()> {
        let wanted: Vec<(u8, f64)> = (1..=n_canonical() as u8).map(|c| (c, nu)).collect();
        self.ensure(&wanted)
    }

    /// Entries needed by every cell of a numbered mesh.
    pub fn ensure_mesh(&mut self, mesh: &OctreeMesh) -> Result<()> {
        self.ensure(&mesh_keys(mesh)?)
    }

    pub fn for_mesh(mesh: &OctreeMesh) -> Result<Self> {
        let mut c = Self::new();
        c.ensure_mesh(mesh)?;
        Ok(c)
    }
}

/// `(canonical id, ν)` of every cell of a numbered mesh.
pub fn mesh_keys(mesh: &OctreeMesh) -> Result<Vec<(u8, f64)>> {
    mesh.cells.iter().map(|c| Ok((c.canonical_id, mesh.materials.get(c.material)?.nu))).collect()
}
