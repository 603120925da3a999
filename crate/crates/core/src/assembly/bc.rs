//! Homogeneous Dirichlet constraints and signal-driven Neumann loads.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::excitation::Signal;
use crate::mesh::face::{face_discretization, SurfaceKind};
use crate::mesh::OctreeMesh;
use crate::topology::{face_flags, face_point_slot};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannLoad {
    pub dof: u32,
    /// Spatial amplitude (N per unit signal).
    pub amplitude: f64,
    pub signal: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundaryConditions {
    /// Fixed DOFs, ascending and unique.
    pub fixed: Vec<u32>,
    /// Loads sorted by DOF, then signal.
    pub loads: Vec<NeumannLoad>,
}

impl BoundaryConditions {
    pub fn new(fixed: impl IntoIterator<Item = u32>, loads: Vec<NeumannLoad>) -> Self {
        let fixed: BTreeSet<u32> = fixed.into_iter().collect();
        let mut merged: BTreeMap<(u32, usize), f64> = BTreeMap::new();
        for l in loads {
            *merged.entry((l.dof, l.signal)).or_insert(0.0) += l.amplitude;
        }
        Self {
            fixed: fixed.into_iter().collect(),
            loads: merged
                .into_iter()
                .map(|((dof, signal), amplitude)| NeumannLoad { dof, amplitude, signal })
                .collect(),
        }
    }

    pub fn validate(&self, n_dof: usize, n_signals: usize) -> Result<()> {
        if let Some(&d) = self.fixed.iter().find(|&&d| d as usize >= n_dof) {
            return Err(invalid(format!("fixed dof {d} out of range")));
        }
        for l in &self.loads {
            if l.dof as usize >= n_dof {
                return Err(invalid(format!("loaded dof {} out of range", l.dof)));
            }
            if l.signal >= n_signals {
                return Err(invalid(format!("load references missing signal {}", l.signal)));
            }
            if self.fixed.binary_search(&l.dof).is_ok() {
                return Err(invalid(format!("dof {} is both fixed and loaded", l.dof)));
            }
        }
        Ok(())
    }

    /// `R_ext(t)` into `r` (overwritten).
    pub fn external_force(&self, signals: &[Signal], t: f64, r: &mut [f64]) {
        r.iter_mut().for_each(|v| *v = 0.0);
        for l in &self.loads {
            r[l.dof as usize] += l.amplitude * signals[l.signal].eval(t);
        }
    }

    pub fn apply_dirichlet(&self, u: &mut [f64]) {
        for &d in &self.fixed {
            u[d as usize] = 0.0;
        }
    }

    /// Largest load magnitude, used to scale the divergence detector.
    pub fn load_scale(&self, signals: &[Signal]) -> f64 {
        self.loads.iter().map(|l| (l.amplitude * signals[l.signal].p0()).abs()).fold(0.0, f64::max)
    }
}

/// Neumann loads at time `t` added to `r`, and Dirichlet DOFs of `u_next` zeroed.
pub fn apply_bcs(r: &mut [f64], u_next: &mut [f64], bcs: &BoundaryConditions, signals: &[Signal], t: f64) {
    for l in &bcs.loads {
        r[l.dof as usize] += l.amplitude * signals[l.signal].eval(t);
    }
    bcs.apply_dirichlet(u_next);
}

/// Axis-aligned plane `x[axis] = coord`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plane {
    pub axis: usize,
    pub coord: f64,
}

fn on_plane(mesh: &OctreeMesh, p: [f64; 3], plane: Plane) -> bool {
    (p[plane.axis] - plane.coord).abs() <= 1e-9 * mesh.root_size
}

/// Selected components of every node on the plane.
pub fn fix_plane(mesh: &OctreeMesh, plane: Plane, components: [bool; 3]) -> Vec<u32> {
    let mut out = Vec::new();
    for (i, p) in mesh.nodes.iter().enumerate() {
        if on_plane(mesh, *p, plane) {
            for (c, &on) in components.iter().enumerate() {
                if on {
                    out.push(3 * i as u32 + c as u32);
                }
            }
        }
    }
    out
}

/// Consistent nodal loads of a uniform traction on all cell faces lying in
/// the plane: each quad gives `A/4` per node, each triangle `A/3`.
pub fn surface_traction(mesh: &OctreeMesh, plane: Plane, traction: [f64; 3], signal: usize) -> Vec<NeumannLoad> {
    let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
    for (ci, c) in mesh.cells.iter().enumerate() {
        for side in 0..2 {
            let f = 2 * plane.axis + side;
            let x = c.origin[plane.axis] + side as f64 * c.size;
            if (x - plane.coord).abs() > 1e-9 * mesh.root_size {
                continue;
            }
            let slots = mesh.slot_nodes(ci);
            let half = 0.5 * c.size;
            for patch in face_discretization(face_flags(c.edge_mask, f)) {
                let pts: Vec<(f64, f64)> =
                    patch.points.iter().map(|&(u, v)| (u as f64 * half, v as f64 * half)).collect();
                let mut a2 = 0.0;
                for i in 0..pts.len() {
                    let (x0, y0) = pts[i];
                    let (x1, y1) = pts[(i + 1) % pts.len()];
                    a2 += x0 * y1 - x1 * y0;
                }
                let share = 0.5 * a2
                    / match patch.kind {
                        SurfaceKind::Quad4 => 4.0,
                        SurfaceKind::Tri3 => 3.0,
                    };
                for &(u, v) in &patch.points {
                    let node = slots[face_point_slot(f, u, v)].expect("face node present");
                    for (d, &t) in traction.iter().enumerate() {
                        if t != 0.0 {
                            *acc.entry(3 * node + d as u32).or_insert(0.0) += share * t;
                        }
                    }
                }
            }
        }
    }
    acc.into_iter().map(|(dof, amplitude)| NeumannLoad { dof, amplitude, signal }).collect()
}
