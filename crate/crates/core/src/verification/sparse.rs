//! Small-scale global assembly, used only by the oracles. The solver never
//! forms the global stiffness.

use faer::sparse::{SparseColMat, Triplet};

use crate::assembly::SolverTables;
use crate::error::{invalid, Result};

/// Symmetric matrix in CSR form restricted to the free DOFs.
#[derive(Debug, Clone)]
pub struct SymCsr {
    pub n: usize,
    pub offsets: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl SymCsr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                s += self.vals[k] * x[self.cols[k] as usize];
            }
            y[i] = s;
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.offsets[i]..self.offsets[i + 1] {
                d[(i, self.cols[k] as usize)] = self.vals[k];
            }
        }
        d
    }

    /// Lower triangle as faer triplets.
    pub fn to_faer_lower(&self) -> Result<SparseColMat<usize, f64>> {
        let mut trip = Vec::with_capacity(self.vals.len() / 2 + self.n);
        for i in 0..self.n {
            for k in self.offsets[i]..self.offsets[i + 1] {
                let j = self.cols[k] as usize;
                if j <= i {
                    trip.push(Triplet::new(i, j, self.vals[k]));
                }
            }
        }
        SparseColMat::try_new_from_triplets(self.n, self.n, &trip).map_err(|e| invalid(format!("sparse build: {e:?}")))
    }
}

/// Free-DOF numbering: `Some(index)` for kept DOFs.
pub fn free_dof_map(n_dof: usize, fixed: &[u32]) -> (Vec<Option<u32>>, usize) {
    let mut map = vec![Some(0u32); n_dof];
    for &d in fixed {
        map[d as usize] = None;
    }
    let mut next = 0u32;
    for m in map.iter_mut().flatten() {
        *m = next;
        next += 1;
    }
    (map, next as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Stiffness,
    ConsistentMass,
}

/// Assembles `K` or the consistent mass from the pattern masters, keeping
/// only free rows and columns.
pub fn assemble(tables: &SolverTables, rho_l3: &[f64], free: &[Option<u32>], n_free: usize, which: Operator) -> SymCsr {
    let mut entries: Vec<(u32, u32, f64)> = Vec::new();
    for e in 0..tables.n_elements() {
        let (g, i) = tables.locate[e];
        let grp = &tables.groups[g as usize];
        let map = &grp.maps[i as usize];
        let (src, s) = match which {
            Operator::Stiffness => (&grp.master.k, grp.scale[i as usize]),
            Operator::ConsistentMass => (&grp.master.m_cons, rho_l3[e]),
        };
        for (a, &da) in map.dofs.iter().enumerate() {
            let Some(ra) = free[da as usize] else { continue };
            for (b, &db) in map.dofs.iter().enumerate() {
                let Some(cb) = free[db as usize] else { continue };
                let v = src[(a, b)] * s * (map.signs[a] * map.signs[b]) as f64;
                entries.push((ra, cb, v));
            }
        }
    }
    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut offsets = vec![0usize; n_free + 1];
    let mut cols = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    let mut last: Option<(u32, u32)> = None;
    for (r, c, v) in entries {
        if last == Some((r, c)) {
            *vals.last_mut().unwrap() += v;
        } else {
            cols.push(c);
            vals.push(v);
            offsets[r as usize + 1] = cols.len();
            last = Some((r, c));
        }
    }
    for i in 1..=n_free {
        offsets[i] = offsets[i].max(offsets[i - 1]);
    }
    SymCsr { n: n_free, offsets, cols, vals }
}
