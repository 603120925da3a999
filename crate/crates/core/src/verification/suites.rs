//! The acceptance checks as library functions, shared by the acceptance
//! test and `octsbfem verify`.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cases::{beam_case, beam_study, demo_case};
use super::cube::{cube_eigenfrequencies, CubeReference, CubeSpec};
use super::meshes::{cube_mesh, CubeMeshType};
use super::sparse::{assemble, free_dof_map, Operator};
use super::study::cube_study;
use crate::assembly::build_solver_tables;
use crate::error::Result;
use crate::excitation::{critical_frequency, wave_speeds, Signal};
use crate::integrator::{cdm_step, init_history, DivergenceGuard, TimeSettings};
use crate::io::probe_csv;
use crate::material::{Material, MaterialTable};
use crate::mesh::{balance_octree, enumerate_nodes, Leaf, OctreeMesh};
use crate::numeric::loglog_slope;
use crate::parallel::{efficiency, speedup, Backend, TimingReport, WorkerClock};
use crate::partition::PartitionMethod;
use crate::pattern::canonical::{n_canonical, orbit_size};
use crate::pattern::transform::{matmul, transform};
use crate::pattern::{canonical_mask, canonicalize, transforms48, PatternCatalog};
use crate::run::{solve, OutputSettings, Parallelism, Problem};
use crate::sbfem::{build_element, count_small_eigenvalues, CellGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    /// Soft checks are reported but never fail a run.
    pub soft: bool,
    pub detail: String,
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Self { name, pass, soft: false, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((pass, detail)) => Self::new(name, pass, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

pub fn pattern_algebra() -> Check {
    let t0 = Instant::now();
    let all = transforms48();
    let ids: std::collections::BTreeSet<_> = all.iter().map(|t| t.matrix).collect();
    let mut closed = true;
    for a in all {
        for b in all {
            let m = matmul(&a.matrix, &b.matrix);
            closed &= ids.contains(&m);
        }
    }
    let identity = all[0].matrix == [[1, 0, 0], [0, 1, 0], [0, 0, 1]] && all.iter().all(|t| t.map_mask(0) == 0);
    let orbits = n_canonical();
    let covered: usize = (1..=orbits as u8).map(orbit_size).sum();
    let consistent = (0..4096u16).all(|m| {
        let (cid, tid) = canonicalize(m);
        transform(tid).map_mask(m) == canonical_mask(cid)
    });
    let secs = t0.elapsed().as_secs_f64();
    let pass = all.len() == 48
        && ids.len() == 48
        && closed
        && identity
        && orbits == 144
        && covered == 4096
        && consistent
        && secs < 1.0;
    Check::new(
        "pattern algebra",
        pass,
        format!("{} transforms, closed {closed}, {orbits} orbits covering {covered} masks, {secs:.3} s", ids.len()),
    )
}

pub fn catalog_sweep() -> Check {
    let mut failures = Vec::new();
    let (mut worst_asym, mut worst_mass) = (0.0f64, 0.0f64);
    for nu in [0.0, 0.3] {
        let mat = Material { e: 1.0, nu, rho: 1.0 };
        for cid in 1..=144u8 {
            let mask = canonical_mask(cid);
            match build_element(&CellGeometry::cube(mask, 1.0), &mat, 0) {
                Ok(el) => {
                    let zeros = count_small_eigenvalues(&el.k, 1e-8);
                    let mut dir = [0.0; 3];
                    for (i, v) in el.m_diag.iter().enumerate() {
                        dir[i % 3] += v;
                    }
                    let mass_err = dir.iter().map(|d| (d - 1.0).abs()).fold(0.0, f64::max);
                    worst_asym = worst_asym.max(el.asymmetry);
                    worst_mass = worst_mass.max(mass_err);
                    if el.asymmetry > 1e-8 || zeros != 6 || el.m_diag.iter().any(|&v| v <= 0.0) || mass_err > 1e-10 {
                        failures.push(format!("cid {cid} nu {nu}: zeros {zeros}"));
                    }
                }
                Err(e) => failures.push(format!("cid {cid} nu {nu}: {e}")),
            }
        }
    }
    Check::new(
        "catalog sweep",
        failures.is_empty(),
        format!("288 elements, max asymmetry {worst_asym:.2e}, max mass error {worst_mass:.2e}, failures {failures:?}"),
    )
}

/// Elements rebuilt at `E = 2`, `ρ = 3`, `L = 2` against the scaled masters.
pub fn scaling_rebuild() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let (eta_e, eta_rho, eta_l) = (2.0, 3.0, 2.0);
        let mut worst = 0.0f64;
        let mut worst_dt = 0.0f64;
        for cid in (1..=144u8).step_by(11).chain([144]) {
            let mask = canonical_mask(cid);
            let unit = build_element(&CellGeometry::cube(mask, 1.0), &Material { e: 1.0, nu: 0.3, rho: 1.0 }, 0)?;
            let big =
                build_element(&CellGeometry::cube(mask, eta_l), &Material { e: eta_e, nu: 0.3, rho: eta_rho }, 0)?;
            let rel = |a: &nalgebra::DMatrix<f64>, b: &nalgebra::DMatrix<f64>| (a - b).amax() / b.amax();
            worst = worst.max(rel(&big.k, &(&unit.k * (eta_e * eta_l))));
            worst = worst.max(rel(&big.m_cons, &(&unit.m_cons * (eta_rho * eta_l.powi(3)))));
            let md: DVector<f64> = &unit.m_diag * (eta_rho * eta_l.powi(3));
            worst = worst.max((&big.m_diag - &md).amax() / md.amax());
            let dt_formula = (eta_rho / eta_e).sqrt() * eta_l * 2.0 / unit.omega_max;
            let dt_direct = 2.0 / big.omega_max;
            worst_dt = worst_dt.max((dt_formula - dt_direct).abs() / dt_direct);
        }
        Ok((
            worst <= 1e-10 && worst_dt <= 1e-10,
            format!("max matrix deviation {worst:.2e}, max time step deviation {worst_dt:.2e}"),
        ))
    })();
    Check::from_result("scaling rebuild", r)
}

/// Base divisions per mesh type; the smallest element is 1 m on the coarsest
/// mesh of every type, as in the reference study.
pub const CUBE_DIVISIONS: [(CubeMeshType, [u32; 3]); 3] =
    [(CubeMeshType::Uniform, [8, 12, 16]), (CubeMeshType::Checkerboard, [4, 6, 8]), (CubeMeshType::Layered, [4, 6, 8])];

pub fn cube_convergence() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let spec = CubeSpec { e: 1000.0, nu: 0.3, rho: 1.0, l: 8.0 };
        let exact = cube_eigenfrequencies(&spec, 100, CubeReference::Elastic)?;
        let plane_stress = cube_eigenfrequencies(&spec, 100, CubeReference::PlaneStress)?;
        let mut pass = true;
        let mut detail = Vec::new();
        for (kind, divisions) in CUBE_DIVISIONS {
            let rows = cube_study(&spec, kind, &divisions, 100)?;
            let dofs: Vec<f64> = rows.iter().map(|r| r.modal.n_dof as f64).collect();
            let errs = rows.iter().map(|r| r.errors(&exact)).collect::<Result<Vec<_>>>()?;
            let lumped: Vec<f64> = errs.iter().map(|e| e.0).collect();
            let consistent: Vec<f64> = errs.iter().map(|e| e.1).collect();
            let (sl, sc) = (loglog_slope(&dofs, &lumped), loglog_slope(&dofs, &consistent));
            let ordered = errs.iter().all(|(l, c)| c <= l);
            let max_dof = rows.iter().map(|r| r.modal.n_dof).max().unwrap_or(0);
            let ok = (sl + 2.0 / 3.0).abs() <= 0.15 && (sc + 2.0 / 3.0).abs() <= 0.15 && ordered && max_dof <= 50_000;
            pass &= ok;
            let p: Vec<f64> = rows.iter().map(|r| r.errors(&plane_stress).map(|e| e.1)).collect::<Result<_>>()?;
            detail.push(format!(
                "type {} dof {max_dof}: LMM {} slope {sl:.3}, CMM {} slope {sc:.3}, CMM against the plane-stress formula {}",
                kind.index(),
                list(&lumped),
                list(&consistent),
                list(&p)
            ));
        }
        Ok((pass, detail.join("; ")))
    })();
    Check::from_result("cube modal convergence", r)
}

pub const BEAM_REFINEMENTS: [u32; 3] = [4, 8, 16];
pub const BEAM_DURATION: f64 = 0.25;

pub fn beam_convergence() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let rows = BEAM_REFINEMENTS
            .iter()
            .map(|&p| beam_study(CubeMeshType::Uniform, p, BEAM_DURATION, 0.95))
            .collect::<Result<Vec<_>>>()?;
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let eu: Vec<f64> = rows.iter().map(|r| r.error_u).collect();
        let ea: Vec<f64> = rows.iter().map(|r| r.error_a).collect();
        let mono = |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
        let (su, sa) = (loglog_slope(&h, &eu), loglog_slope(&h, &ea));
        let pass = mono(&eu) && mono(&ea) && su > 0.0 && sa > 0.0;
        let dofs: Vec<usize> = rows.iter().map(|r| r.n_dof).collect();
        Ok((
            pass,
            format!(
                "h {h:?} dof {dofs:?}: displacement {} slope {su:.2}, acceleration {} slope {sa:.2}",
                list(&eu),
                list(&ea)
            ),
        ))
    })();
    Check::from_result("beam transient convergence", r)
}

/// Two-material mesh with hanging nodes used by the small-mesh checks.
pub fn mixed_mesh() -> Result<OctreeMesh> {
    let mut mats = MaterialTable::single(Material::new(1000.0, 0.3, 1.0)?);
    mats.insert(2, Material::new(3000.0, 0.25, 2.0)?)?;
    let mut leaves = Vec::new();
    for k in 0..2u32 {
        for j in 0..2u32 {
            for i in 0..4u32 {
                let material = if i >= 2 { 2 } else { 1 };
                if (i, j, k) == (1, 0, 0) || (i, j, k) == (2, 1, 1) {
                    for c in 0..8u32 {
                        let a = [2 * i + (c & 1), 2 * j + ((c >> 1) & 1), 2 * k + (c >> 2)];
                        leaves.push(Leaf { level: 3, anchor: a, material });
                    }
                } else {
                    leaves.push(Leaf { level: 2, anchor: [i, j, k], material });
                }
            }
        }
    }
    enumerate_nodes(&balance_octree(&OctreeMesh::from_leaves([0.0; 3], 4.0, leaves, mats)))
}

pub fn ebe_correctness() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let m = Material::new(1000.0, 0.3, 1.0)?;
        let mut meshes = vec![("mixed", mixed_mesh()?)];
        for kind in CubeMeshType::ALL {
            meshes.push(("cube", cube_mesh(kind, 4, 8.0, m)?));
        }
        meshes.push(("demo", demo_case()?.mesh));
        let mut worst = 0.0f64;
        let mut sizes = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (_, mesh) in meshes.iter().filter(|(_, m)| m.n_dof() <= 5000) {
            let tables = build_solver_tables(mesh, &PatternCatalog::for_mesh(mesh)?)?;
            let (free, n) = free_dof_map(tables.n_dof, &[]);
            let k = assemble(&tables, &vec![0.0; mesh.cells.len()], &free, n, Operator::Stiffness);
            let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (mut dense, mut ebe) = (vec![0.0; n], vec![0.0; n]);
            k.matvec(&u, &mut dense);
            tables.internal_force(&u, &mut ebe);
            let norm = dense.iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = dense.iter().zip(&ebe).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(err / norm);
            sizes.push(n);
        }
        Ok((
            worst <= 1e-10 && sizes.len() >= 4,
            format!("meshes with {sizes:?} DOFs, max relative deviation {worst:.2e}"),
        ))
    })();
    Check::from_result("element-by-element force", r)
}

/// Free single element from random displacements; returns the peak
/// displacement or the divergence error.
pub fn single_element_run(canonical_id: u8, dt_factor: f64, steps: usize) -> Result<f64> {
    let el = build_element(
        &CellGeometry::cube(canonical_mask(canonical_id), 1.0),
        &Material { e: 1.0, nu: 0.3, rho: 1.0 },
        0,
    )?;
    let k = (&el.k + el.k.transpose()) * 0.5;
    let n = k.nrows();
    let dt = dt_factor * 2.0 / el.omega_max;
    let mut rng = ChaCha8Rng::seed_from_u64(canonical_id as u64);
    let u0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m: Vec<f64> = el.m_diag.iter().copied().collect();
    let force = |u: &[f64]| -> Vec<f64> { (&k * DVector::from_column_slice(u)).iter().copied().collect() };
    let a0: Vec<f64> = force(&u0).iter().zip(&m).map(|(f, m)| -f / m).collect();
    let mut up = init_history(&u0, &vec![0.0; n], &a0, dt)?;
    let mut uc = u0.clone();
    let mut un = vec![0.0; n];
    let guard = DivergenceGuard::new(1.0);
    let zero = vec![0.0; n];
    let mut peak = 0.0f64;
    for step in 1..=steps {
        cdm_step(&up, &uc, &zero, &force(&uc), &m, 0.0, dt, &mut un)?;
        guard.check(&un, step)?;
        peak = un.iter().fold(peak, |p, v| p.max(v.abs()));
        std::mem::swap(&mut up, &mut uc);
        std::mem::swap(&mut uc, &mut un);
    }
    Ok(peak)
}

fn oscillator_error(dt: f64) -> Result<f64> {
    let u0 = 1.0;
    let mut up = init_history(&[u0], &[0.0], &[-u0], dt)?;
    let mut uc = vec![u0];
    let mut un = vec![0.0];
    let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
    let mut err = 0.0f64;
    for n in 0..steps {
        cdm_step(&up, &uc, &[0.0], &[uc[0]], &[1.0], 0.0, dt, &mut un)?;
        err = err.max((un[0] - ((n + 1) as f64 * dt).cos()).abs());
        up = std::mem::replace(&mut uc, un.clone());
    }
    Ok(err)
}

pub fn cdm_stability() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let mut detail = Vec::new();
        let mut pass = true;
        for cid in [1u8, 144] {
            let peak = single_element_run(cid, 1.0, 10_000)?;
            let diverged = matches!(single_element_run(cid, 2.0, 10_000), Err(crate::Error::Divergence { .. }));
            pass &= peak.is_finite() && peak < 1e3 && diverged;
            detail.push(format!("pattern {cid}: peak {peak:.3} at dt_cr, diverges at 2 dt_cr {diverged}"));
        }
        let (e1, e2) = (oscillator_error(0.02)?, oscillator_error(0.01)?);
        let ratio = e1 / e2;
        pass &= (ratio / 4.0 - 1.0).abs() <= 0.2;
        detail.push(format!("oscillator error ratio for halved step {ratio:.3}"));
        Ok((pass, detail.join("; ")))
    })();
    Check::from_result("central difference stability", r)
}

fn probe_files(problem: &Problem, time: &TimeSettings, par: &Parallelism) -> Result<Vec<String>> {
    let sol = solve(problem, time, &OutputSettings::default(), par)?;
    Ok(sol.output.probes.iter().map(|p| probe_csv(&p.rows)).collect())
}

pub fn parallel_equivalence() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let mut detail = Vec::new();
        let mut pass = true;
        for (name, problem, steps) in
            [("beam", beam_case(CubeMeshType::Uniform, 4)?, 120usize), ("demo", demo_case()?, 200)]
        {
            let mut time = TimeSettings::new(1.0);
            let dt = 0.95 * problem.dt_cr;
            time.dt = Some(dt);
            time.duration = steps as f64 * dt;
            let serial = probe_files(&problem, &time, &Parallelism::default())?;
            let mut same = Vec::new();
            for workers in [2, 4, 8] {
                let par = Parallelism { workers, backend: Backend::Sim, ..Parallelism::default() };
                same.push(probe_files(&problem, &time, &par)? == serial);
            }
            let materials =
                problem.mesh.cells.iter().map(|c| c.material).collect::<std::collections::BTreeSet<_>>().len();
            pass &= same.iter().all(|&s| s) && serial.iter().all(|f| f.lines().count() == steps + 2);
            detail.push(format!(
                "{name} ({} DOF, {materials} materials): identical for N=2,4,8 {same:?}",
                problem.tables.n_dof
            ));
        }
        Ok((pass, detail.join("; ")))
    })();
    Check::from_result("parallel equivalence", r)
}

pub fn timing_formulas() -> Check {
    let clock = |t: f64| WorkerClock { start: 0.0, end: t, compute: t, wait: 0.0 };
    let serial = TimingReport::from_clocks(&[clock(6566.12)]);
    let two = TimingReport::from_clocks(&[clock(3234.37), clock(3100.0)]);
    let s = format!("{:.2}", two.speedup_over(&serial));
    let eta = format!("{:.2}", two.efficiency_over(&serial));
    let eta128 = format!("{:.2}", efficiency(84.3, 128));
    let s_direct = format!("{:.2}", speedup(6566.12, 3234.37));
    let pass = s == "2.03" && eta == "1.02" && eta128 == "0.66" && s_direct == s;
    Check::new("timing formulas", pass, format!("s = {s}, eta = {eta}; N = 128, s = 84.3 gives eta = {eta128}"))
}

pub fn signal_spectra() -> Check {
    let r = (|| -> Result<(bool, String)> {
        let t1 = 1.0;
        let cases = [
            (Signal::Ricker { t1, p0: 1.0 }, 0.95, 2.2),
            (Signal::Triangle { t1, p0: 1.0 }, 0.95, 1.8),
            (Signal::SineBurst { t1, p0: 1.0, n: 5 }, 0.85, 5.8),
        ];
        let mut pass = true;
        let mut detail = Vec::new();
        for (s, frac, want) in cases {
            let f1 = critical_frequency(&s, frac)? * t1;
            pass &= (f1 / want - 1.0).abs() <= 0.05;
            detail.push(format!("{f1:.4}/t1 vs {want}/t1"));
        }
        let (v100, _) = wave_speeds(1.0e4, 0.0, 1.0)?;
        let (vp, vs) = wave_speeds(17.0e9, 0.2, 2400.0)?;
        for (got, want) in [(v100, 100.0), (vp, 2805.0), (vs, 1718.0)] {
            pass &= (got / want - 1.0).abs() <= 1e-3;
            detail.push(format!("{got:.1} m/s vs {want}"));
        }
        Ok((pass, detail.join(", ")))
    })();
    Check::from_result("signal spectra and wave speeds", r)
}

/// Wall time of `steps` steps on a uniform box with at least `min_dof`
/// DOFs, serially and with four threads. Never gates.
pub fn soft_scaling(min_dof: usize, steps: usize) -> Check {
    let r = (|| -> Result<(bool, String)> {
        let n = ((min_dof as f64 / 3.0).cbrt().ceil() as u32).saturating_sub(1).max(1);
        let mats = MaterialTable::single(Material::new(1000.0, 0.3, 1.0)?);
        let mesh = enumerate_nodes(&OctreeMesh::uniform_box([n, n, n], 1.0, mats))?;
        let fixed = crate::assembly::fix_plane(&mesh, crate::assembly::Plane { axis: 2, coord: 0.0 }, [true; 3]);
        let loads = crate::assembly::surface_traction(
            &mesh,
            crate::assembly::Plane { axis: 2, coord: n as f64 },
            [0.0, 0.0, -1.0],
            0,
        );
        let bcs = crate::assembly::BoundaryConditions::new(fixed, loads);
        let problem =
            Problem::new(mesh, PatternCatalog::new(), bcs, vec![Signal::Ricker { t1: 0.5, p0: 1.0 }], vec![])?;
        let mut time = TimeSettings::new(1.0);
        time.dt = Some(0.9 * problem.dt_cr);
        time.duration = steps as f64 * time.dt.unwrap();
        let t1 = solve(&problem, &time, &OutputSettings::default(), &Parallelism::default())?.timing;
        let par = Parallelism {
            workers: 4,
            backend: Backend::Proc,
            method: PartitionMethod::Geometric,
            ..Parallelism::default()
        };
        let t4 = solve(&problem, &time, &OutputSettings::default(), &par)?.timing;
        let cores = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
        let table = crate::io::timing_table(&[t1.clone(), t4.clone()]);
        Ok((
            t4.t_t < t1.t_t,
            format!("{} DOF, {steps} steps, {cores} core(s)\n{}", problem.tables.n_dof, table.trim_end()),
        ))
    })();
    let mut c = Check::from_result("soft scaling (not a gate)", r);
    c.soft = true;
    c
}
