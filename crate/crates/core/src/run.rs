//! End-to-end driver: problem setup from a config, serial or SPMD solve,
//! and the output files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::assembly::{
    build_solver_tables, initial_state, run_transient, BoundaryConditions, Probe, SolverTables, StepContext,
    TransientOutput,
};
use crate::error::Result;
use crate::excitation::Signal;
use crate::integrator::{critical_time_step, TimeSettings};
use crate::io::{self, corner_node_set, write_probe_files, RunConfig, VtkGrid};
use crate::mesh::OctreeMesh;
use crate::parallel::{plan_exchange, spmd_run, Backend, TimingReport, WorkerTiming};
use crate::partition::{partition_with_limit, Partition, PartitionMethod, DEFAULT_SPECTRAL_LIMIT};
use crate::pattern::PatternCatalog;

pub struct Problem {
    pub mesh: OctreeMesh,
    pub catalog: PatternCatalog,
    pub tables: SolverTables,
    pub bcs: BoundaryConditions,
    pub signals: Vec<Signal>,
    pub probes: Vec<Probe>,
    pub dt_cr: f64,
    /// Cell corners, the node set of snapshots and VTK output.
    pub corner_nodes: Vec<u32>,
}

impl Problem {
    /// `catalog` may hold cached master cells; missing ones are built.
    pub fn new(
        mesh: OctreeMesh,
        catalog: PatternCatalog,
        bcs: BoundaryConditions,
        signals: Vec<Signal>,
        probes: Vec<Probe>,
    ) -> Result<Self> {
        let mut catalog = catalog;
        catalog.ensure_mesh(&mesh)?;
        let tables = build_solver_tables(&mesh, &catalog)?;
        bcs.validate(tables.n_dof, signals.len())?;
        let dt_cr = critical_time_step(&mesh, &catalog)?;
        let corner_nodes = corner_node_set(&mesh);
        Ok(Self { mesh, catalog, tables, bcs, signals, probes, dt_cr, corner_nodes })
    }

    /// Applies material overrides, boundary conditions and probes from `cfg`.
    pub fn from_config(cfg: &RunConfig, mut mesh: OctreeMesh, catalog: PatternCatalog) -> Result<Self> {
        if let Some(m) = &cfg.mesh.materials {
            for c in &mesh.cells {
                m.get(c.material)?;
            }
            mesh.materials = m.clone();
        }
        let bcs = cfg.boundary_conditions(&mesh)?;
        let probes = cfg.resolve_probes(&mesh)?;
        Self::new(mesh, catalog, bcs, cfg.signals.clone(), probes)
    }

    pub fn context(&self, dt: f64, alpha: f64, output: &OutputSettings) -> StepContext<'_> {
        StepContext {
            tables: &self.tables,
            bcs: &self.bcs,
            signals: &self.signals,
            dt,
            alpha,
            probes: &self.probes,
            record_every: output.record_every,
            snapshot_every: output.snapshot_every,
            snapshot_nodes: &self.corner_nodes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSettings {
    pub record_every: usize,
    pub snapshot_every: Option<usize>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self { record_every: 1, snapshot_every: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parallelism {
    pub workers: usize,
    pub backend: Backend,
    pub method: PartitionMethod,
    /// DOF count above which `Auto` partitions geometrically.
    pub spectral_limit: usize,
}

impl Default for Parallelism {
    fn default() -> Self {
        Self {
            workers: 1,
            backend: Backend::Sim,
            method: PartitionMethod::Auto,
            spectral_limit: DEFAULT_SPECTRAL_LIMIT,
        }
    }
}

pub struct Solution {
    pub dt: f64,
    pub steps: usize,
    pub output: TransientOutput,
    pub timing: TimingReport,
    pub partition: Option<Partition>,
}

/// Integrates `steps` steps. One worker runs the serial driver; more
/// partition the mesh and run the SPMD driver, which yields bitwise the same
/// histories.
pub fn solve(problem: &Problem, time: &TimeSettings, output: &OutputSettings, par: &Parallelism) -> Result<Solution> {
    let (dt, steps) = time.resolve(problem.dt_cr)?;
    let ctx = problem.context(dt, time.alpha, output);
    if par.workers == 1 {
        let t = Instant::now();
        let (out, _) = run_transient(&ctx, steps)?;
        let t_t = t.elapsed().as_secs_f64();
        let timing = TimingReport::from_workers(vec![WorkerTiming { worker: 0, t_c: t_t, t_w: 0.0, t_t }]);
        return Ok(Solution { dt, steps, output: out, timing, partition: None });
    }
    let part = partition_with_limit(&problem.mesh, par.workers, par.method, par.spectral_limit)?;
    let plan = plan_exchange(&problem.tables, &part.labels, par.workers)?;
    let state = initial_state(&ctx, None, None)?;
    let run = spmd_run(&ctx, &plan, par.backend, state, steps)?;
    Ok(Solution { dt, steps, output: run.output, timing: run.timing, partition: Some(part) })
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub n_elements: usize,
    pub n_dof: usize,
    pub n_patterns: usize,
    pub dt_cr: f64,
    pub dt: f64,
    pub steps: usize,
    pub workers: usize,
    pub t_t: f64,
    pub files: Vec<PathBuf>,
}

pub fn snapshot_file_name(step: usize) -> String {
    format!("snapshot_{step:08}.vtk")
}

/// Probe CSVs, VTK snapshots, the results container, timing and (for
/// parallel runs) the partition, all under `dir`.
pub fn write_outputs(problem: &Problem, sol: &Solution, dir: &Path) -> Result<RunSummary> {
    std::fs::create_dir_all(dir)?;
    let mut files = write_probe_files(&sol.output.probes, dir)?;
    let base = VtkGrid::from_mesh(&problem.mesh, &problem.corner_nodes, sol.partition.as_ref())?;
    for s in &sol.output.snapshots {
        let values = s.displacement.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let mut grid = base.clone().with_displacement(values)?;
        grid.title = format!("octree-sbfem step {} t {:e}", s.step, s.time);
        let path = dir.join(snapshot_file_name(s.step));
        std::fs::write(&path, io::write_vtk(&grid))?;
        files.push(path);
    }
    let results = io::Results { dt: sol.dt, snapshot_nodes: problem.corner_nodes.clone(), output: sol.output.clone() };
    let path = dir.join("results.bin");
    io::write_results(&results, &path)?;
    files.push(path);
    let path = dir.join("timing.csv");
    std::fs::write(&path, io::timing_csv(&sol.timing))?;
    files.push(path);
    if let Some(p) = &sol.partition {
        let path = dir.join("partition.json");
        std::fs::write(&path, io::partition_json(p))?;
        files.push(path);
    }
    let summary = RunSummary {
        n_elements: problem.mesh.cells.len(),
        n_dof: problem.tables.n_dof,
        n_patterns: problem.tables.groups.len(),
        dt_cr: problem.dt_cr,
        dt: sol.dt,
        steps: sol.steps,
        workers: sol.timing.n_workers,
        t_t: sol.timing.t_t,
        files,
    };
    let path = dir.join("summary.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
