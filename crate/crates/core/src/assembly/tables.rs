//! Pattern-grouped element tables and element-by-element internal force.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::material::nu_key;
use crate::mesh::OctreeMesh;
use crate::pattern::{element_dof_map, ElementDofMap, MasterCell, PatternCatalog};

/// Elements sharing one master cell. The per-element scale `S = E·L`
/// converts the unit master stiffness to the element.
#[derive(Debug, Clone)]
pub struct PatternGroup {
    pub canonical_id: u8,
    pub nu_key: i64,
    pub master: Arc<MasterCell>,
    /// Master stiffness, row-major.
    pub k_rows: Vec<f64>,
    pub elements: Vec<u32>,
    pub maps: Vec<ElementDofMap>,
    pub scale: Vec<f64>,
}

impl PatternGroup {
    pub fn n_dof(&self) -> usize {
        self.master.n_dof()
    }

    /// `S · K_master · u_e` for member `idx`, with `u_e` gathered from `u`.
    #[inline]
    pub fn element_force(&self, idx: usize, u: &[f64], ue: &mut [f64], fe: &mut [f64]) {
        self.maps[idx].gather(u, &mut ue[..self.n_dof()]);
        self.element_force_gathered(idx, ue, fe);
    }

    /// Same as [`Self::element_force`] for an already gathered `u_e`. Every
    /// force path goes through this so results agree bitwise.
    #[inline]
    pub fn element_force_gathered(&self, idx: usize, ue: &[f64], fe: &mut [f64]) {
        let n = self.n_dof();
        let s = self.scale[idx];
        for (i, f) in fe[..n].iter_mut().enumerate() {
            let row = &self.k_rows[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * ue[j];
            }
            *f = acc * s;
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverTables {
    pub groups: Vec<PatternGroup>,
    pub n_dof: usize,
    pub m_diag: Vec<f64>,
    pub inv_mass: Vec<f64>,
    /// Per element: group index and position inside the group.
    pub locate: Vec<(u32, u32)>,
    /// Offset of each element's force block in a flat buffer.
    pub offsets: Vec<usize>,
}

pub const MAX_ELEMENT_DOF: usize = 78;

pub fn build_solver_tables(mesh: &OctreeMesh, catalog: &PatternCatalog) -> Result<SolverTables> {
    if !mesh.is_numbered() {
        return Err(invalid("mesh nodes have not been enumerated"));
    }
    let n_dof = mesh.n_dof();
    let mut by_key: BTreeMap<(u8, i64), usize> = BTreeMap::new();
    let mut groups: Vec<PatternGroup> = Vec::new();
    let mut locate = Vec::with_capacity(mesh.cells.len());
    let mut m_diag = vec![0.0; n_dof];
    for (e, c) in mesh.cells.iter().enumerate() {
        let mat = mesh.materials.get(c.material)?;
        let master = catalog.get(c.canonical_id, mat.nu)?;
        let key = (c.canonical_id, nu_key(mat.nu));
        let g = *by_key.entry(key).or_insert_with(|| {
            let n = master.n_dof();
            let k_rows = (0..n * n).map(|i| master.k[(i / n, i % n)]).collect();
            groups.push(PatternGroup {
                canonical_id: key.0,
                nu_key: key.1,
                master: master.clone(),
                k_rows,
                elements: Vec::new(),
                maps: Vec::new(),
                scale: Vec::new(),
            });
            groups.len() - 1
        });
        let map = element_dof_map(mesh, e)?;
        let mscale = mat.rho * c.size.powi(3);
        for (i, &d) in map.dofs.iter().enumerate() {
            m_diag[d as usize] += mscale * master.m_diag[i];
        }
        let grp = &mut groups[g];
        locate.push((g as u32, grp.elements.len() as u32));
        grp.elements.push(e as u32);
        grp.maps.push(map);
        grp.scale.push(mat.e * c.size);
    }
    if let Some(i) = m_diag.iter().position(|&m| !(m > 0.0)) {
        return Err(invalid(format!("dof {i} has no positive mass")));
    }
    let inv_mass = m_diag.iter().map(|m| 1.0 / m).collect();
    let mut offsets = Vec::with_capacity(locate.len() + 1);
    let mut off = 0;
    offsets.push(0);
    for &(g, _) in &locate {
        off += groups[g as usize].n_dof();
        offsets.push(off);
    }
    Ok(SolverTables { groups, n_dof, m_diag, inv_mass, locate, offsets })
}

impl SolverTables {
    pub fn n_elements(&self) -> usize {
        self.locate.len()
    }

    pub fn element_map(&self, e: usize) -> &ElementDofMap {
        let (g, i) = self.locate[e];
        &self.groups[g as usize].maps[i as usize]
    }

    pub fn element_force(&self, e: usize, u: &[f64], ue: &mut [f64], fe: &mut [f64]) {
        let (g, i) = self.locate[e];
        self.groups[g as usize].element_force(i as usize, u, ue, fe);
    }

    /// Serial `R_int = K u` without assembling `K`; contributions are added
    /// in ascending element id.
    pub fn internal_force(&self, u: &[f64], r: &mut [f64]) {
        r.iter_mut().for_each(|v| *v = 0.0);
        let mut ue = [0.0; MAX_ELEMENT_DOF];
        let mut fe = [0.0; MAX_ELEMENT_DOF];
        for e in 0..self.n_elements() {
            self.element_force(e, u, &mut ue, &mut fe);
            self.element_map(e).scatter_add(&fe, r);
        }
    }

    /// Element forces computed group by group in parallel into `buffer`,
    /// then scattered in ascending element id. Bitwise equal to
    /// [`Self::internal_force`].
    pub fn internal_force_parallel(&self, u: &[f64], buffer: &mut Vec<f64>, r: &mut [f64]) {
        buffer.resize(*self.offsets.last().unwrap(), 0.0);
        let offsets = &self.offsets;
        let chunks: Vec<(usize, &mut [f64])> = {
            let mut out = Vec::with_capacity(self.n_elements());
            let mut rest: &mut [f64] = buffer.as_mut_slice();
            for e in 0..self.n_elements() {
                let (head, tail) = rest.split_at_mut(offsets[e + 1] - offsets[e]);
                out.push((e, head));
                rest = tail;
            }
            out
        };
        chunks
            .into_par_iter()
            .with_min_len(256)
            .for_each_init(|| [0.0; MAX_ELEMENT_DOF], |ue, (e, fe)| self.element_force(e, u, ue, fe));
        r.iter_mut().for_each(|v| *v = 0.0);
        for e in 0..self.n_elements() {
            self.element_map(e).scatter_add(&buffer[offsets[e]..offsets[e + 1]], r);
        }
    }
}
