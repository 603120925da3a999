//! Ready-to-run transient problems: the end-loaded beam and the
//! three-material demo.

use super::beam::{history_error, rod_response, RodSpec};
use super::meshes::{beam_mesh, three_material_demo, CubeMeshType};
use crate::assembly::{fix_plane, run_transient, surface_traction, BoundaryConditions, Plane, Probe, TransientOutput};
use crate::error::{invalid, Result};
use crate::excitation::Signal;
use crate::material::Material;
use crate::mesh::OctreeMesh;
use crate::pattern::PatternCatalog;
use crate::run::{OutputSettings, Problem};

pub const BEAM_LENGTH: f64 = 16.0;
pub const BEAM_PROBES: [f64; 4] = [4.0, 8.0, 12.0, 16.0];

pub fn beam_material() -> Material {
    Material { e: 1.0e4, nu: 0.0, rho: 1.0 }
}

pub fn beam_signal() -> Signal {
    Signal::Ricker { t1: 0.015, p0: 1.0 }
}

fn probe_at(mesh: &OctreeMesh, name: String, p: [f64; 3]) -> Result<Probe> {
    let node = mesh.nearest_node(p).ok_or_else(|| invalid("mesh has no nodes"))?;
    if mesh.nodes[node].iter().zip(&p).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(invalid(format!("no node at probe point {p:?}")));
    }
    Ok(Probe { name, node: node as u32 })
}

/// Beam clamped at `x = 0` with a Ricker pressure on `x = 16`, probes on the
/// edge `y = z = 0`.
pub fn beam_case(kind: CubeMeshType, per_unit: u32) -> Result<Problem> {
    let mesh = beam_mesh(kind, BEAM_LENGTH as u32, per_unit, beam_material())?;
    let fixed = fix_plane(&mesh, Plane { axis: 0, coord: 0.0 }, [true; 3]);
    let loads = surface_traction(&mesh, Plane { axis: 0, coord: BEAM_LENGTH }, [-1.0, 0.0, 0.0], 0);
    let probes = BEAM_PROBES.iter().map(|&x| probe_at(&mesh, format!("x{x}"), [x, 0.0, 0.0])).collect::<Result<_>>()?;
    Problem::new(mesh, PatternCatalog::new(), BoundaryConditions::new(fixed, loads), vec![beam_signal()], probes)
}

/// The three-material slab, clamped at the base and loaded on top by a
/// vertical Ricker pressure and a tangential triangle pulse.
pub fn demo_case() -> Result<Problem> {
    let mesh = three_material_demo()?;
    let fixed = fix_plane(&mesh, Plane { axis: 2, coord: 0.0 }, [true; 3]);
    let mut loads = surface_traction(&mesh, Plane { axis: 2, coord: 4.0 }, [0.0, 0.0, -1.0], 0);
    loads.extend(surface_traction(&mesh, Plane { axis: 2, coord: 4.0 }, [1.0, 0.5, 0.0], 1));
    let signals = vec![Signal::Ricker { t1: 0.2, p0: 10.0 }, Signal::Triangle { t1: 0.1, p0: 5.0 }];
    let probes = [[0.0, 0.0, 4.0], [4.0, 2.0, 4.0], [8.0, 4.0, 2.0], [3.0, 2.0, 2.0]]
        .iter()
        .enumerate()
        .map(|(i, &p)| probe_at(&mesh, format!("p{i}"), p))
        .collect::<Result<_>>()?;
    Problem::new(mesh, PatternCatalog::new(), BoundaryConditions::new(fixed, loads), signals, probes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamStudyRow {
    pub h: f64,
    pub n_dof: usize,
    pub dt: f64,
    pub steps: usize,
    pub error_u: f64,
    pub error_a: f64,
}

/// Axial displacement and acceleration histories at the probes against the
/// 1D solution, run at `safety · Δt_cr` for `duration`.
pub fn beam_study(kind: CubeMeshType, per_unit: u32, duration: f64, safety: f64) -> Result<BeamStudyRow> {
    let case = beam_case(kind, per_unit)?;
    let dt = safety * case.dt_cr;
    let steps = (duration / dt).ceil() as usize;
    let (out, _) = run_transient(&case.context(dt, 0.0, &OutputSettings::default()), steps)?;
    let (e_u, e_a) = beam_errors(&case, &out)?;
    Ok(BeamStudyRow { h: 1.0 / per_unit as f64, n_dof: case.tables.n_dof, dt, steps, error_u: e_u, error_a: e_a })
}

pub fn beam_errors(case: &Problem, out: &TransientOutput) -> Result<(f64, f64)> {
    let m = beam_material();
    let rod = RodSpec { e: m.e, rho: m.rho, length: BEAM_LENGTH };
    let signal = beam_signal();
    let (mut nu, mut ru, mut na, mut ra) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for history in &out.probes {
        let x = case.mesh.nodes[history.node as usize][0];
        for row in &history.rows {
            let (u, a) = rod_response(&rod, &signal, x, row[0])?;
            nu.push(row[1]);
            ru.push(u);
            na.push(row[4]);
            ra.push(a);
        }
    }
    Ok((history_error(&nu, &ru)?, history_error(&na, &ra)?))
}
