//! `octsbfem`: mesh generation, catalog precomputation, partitioning,
//! transient runs and the verification suites.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use octree_sbfem::excitation::{critical_frequency, Signal};
use octree_sbfem::io::{self, probe_csv, read_mesh, read_results, write_mesh, RunConfig, VtkGrid};
use octree_sbfem::mesh::{balance_octree, build_octree, enumerate_nodes, BuildCriteria, Geometry, OctreeMesh};
use octree_sbfem::parallel::Backend;
use octree_sbfem::partition::{partition, PartitionMethod};
use octree_sbfem::pattern::{cache, mesh_keys, PatternCatalog};
use octree_sbfem::run::{solve, write_outputs, OutputSettings, Parallelism, Problem};
use octree_sbfem::verification::{self, suites, CubeMeshType};
use octree_sbfem::{Error, MaterialTable};

#[derive(Parser)]
#[command(name = "octsbfem", version, about = "Explicit octree SBFEM solver for elastic wave propagation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a balanced, numbered octree mesh file.
    Mesh(MeshArgs),
    /// Build master cells for every pattern at the given Poisson ratios.
    Precompute {
        #[arg(long, required = true)]
        nu: Vec<f64>,
        #[arg(long)]
        cache: PathBuf,
    },
    /// Partition a mesh and write the partition report.
    Partition {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        parts: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a transient analysis from a JSON config.
    Run(RunArgs),
    /// Run acceptance suites; all hard checks by default.
    Verify {
        /// Suite numbers to run (1 to 11).
        #[arg(long = "suite")]
        suites: Vec<usize>,
        /// Minimum DOF of the soft scaling run.
        #[arg(long, default_value_t = 1_000_000)]
        soft_dof: usize,
    },
    /// Sample a load signal, its spectrum and critical frequency.
    Signal(SignalArgs),
    /// Extract one history from a results file as CSV.
    Probe {
        results: PathBuf,
        #[arg(long, conflicts_with = "node")]
        name: Option<String>,
        #[arg(long)]
        node: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Spectral,
    Geometric,
}

impl From<MethodArg> for PartitionMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => PartitionMethod::Auto,
            MethodArg::Spectral => PartitionMethod::Spectral,
            MethodArg::Geometric => PartitionMethod::Geometric,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Builtin {
    Beam,
    Demo,
    Cube,
}

#[derive(clap::Args)]
struct MeshArgs {
    /// JSON with `geometry`, `criteria` and `materials`.
    #[arg(long, required_unless_present = "builtin", conflicts_with = "builtin")]
    geometry: Option<PathBuf>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Elements per unit length (beam) or per edge (cube).
    #[arg(long, default_value_t = 4)]
    resolution: u32,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the mesh as VTK.
    #[arg(long)]
    vtk: Option<PathBuf>,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Run configuration (JSON).
    config: PathBuf,
    /// Worker count, a power of two; overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// `sim` or `proc` (alias `threads`); overrides the config.
    #[arg(long, env = io::ENV_BACKEND)]
    backend: Option<String>,
    /// Overrides the config's output directory.
    #[arg(long, env = io::ENV_OUTPUT_DIR)]
    output_dir: Option<PathBuf>,
    /// Master-cell cache, read and extended as needed.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SignalArgs {
    #[arg(long, value_enum)]
    kind: SignalKind,
    #[arg(long)]
    t1: f64,
    #[arg(long, default_value_t = 1.0)]
    p0: f64,
    /// Cycles of a sine burst.
    #[arg(long, default_value_t = 5)]
    cycles: u32,
    #[arg(long, default_value_t = 0.95)]
    fraction: f64,
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Time series CSV.
    #[arg(long)]
    series: Option<PathBuf>,
    /// Spectrum CSV.
    #[arg(long)]
    spectrum: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalKind {
    Ricker,
    Triangle,
    SineBurst,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshSpec {
    geometry: Geometry,
    criteria: BuildCriteria,
    materials: MaterialTable,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invalid(_) | Error::Json(_) | Error::NotPowerOfTwo(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(a) => mesh(a),
        Command::Precompute { nu, cache } => precompute(&nu, &cache),
        Command::Partition { mesh, parts, method, output } => {
            partition_cmd(&mesh, parts, method.into(), output.as_deref())
        }
        Command::Run(a) => run(a),
        Command::Verify { suites, soft_dof } => verify(&suites, soft_dof),
        Command::Signal(a) => signal(a),
        Command::Probe { results, name, node, output } => probe(&results, name.as_deref(), node, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn mesh(a: MeshArgs) -> Outcome {
    let mesh: OctreeMesh = match (a.builtin, &a.geometry) {
        (Some(Builtin::Beam), _) => verification::beam_mesh(
            CubeMeshType::Uniform,
            verification::cases::BEAM_LENGTH as u32,
            a.resolution,
            verification::cases::beam_material(),
        )?,
        (Some(Builtin::Demo), _) => verification::three_material_demo()?,
        (Some(Builtin::Cube), _) => verification::cube_mesh(
            CubeMeshType::Uniform,
            a.resolution,
            8.0,
            octree_sbfem::Material::new(1000.0, 0.3, 1.0)?,
        )?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(Error::from)?;
            let spec: MeshSpec = serde_json::from_str(&text).map_err(Error::from)?;
            let raw = build_octree(&spec.geometry, &spec.criteria, &spec.materials)?;
            enumerate_nodes(&balance_octree(&raw))?
        }
        (None, None) => return Err(Failure::Usage("need --geometry or --builtin".into())),
    };
    write_mesh(&mesh, &a.output)?;
    if let Some(vtk) = &a.vtk {
        let grid = VtkGrid::from_mesh(&mesh, &io::corner_node_set(&mesh), None)?;
        std::fs::write(vtk, io::write_vtk(&grid)).map_err(Error::from)?;
    }
    println!("{} cells, {} nodes, {} DOF, depth {}", mesh.cells.len(), mesh.n_dof() / 3, mesh.n_dof(), mesh.depth());
    Ok(())
}

fn precompute(nus: &[f64], path: &Path) -> Outcome {
    let mut catalog = cache::read(path).unwrap_or_else(|_| PatternCatalog::new());
    for &nu in nus {
        catalog.ensure_all(nu)?;
    }
    cache::write(&catalog, path)?;
    println!("{} master cells in {}", catalog.len(), path.display());
    Ok(())
}

fn partition_cmd(mesh_path: &Path, parts: usize, method: PartitionMethod, output: Option<&Path>) -> Outcome {
    let mesh = read_mesh(mesh_path)?;
    let p = partition(&mesh, parts, method)?;
    let json = io::partition_json(&p);
    match output {
        Some(path) => std::fs::write(path, json).map_err(Error::from)?,
        None => println!("{json}"),
    }
    eprintln!("{parts} parts, imbalance {:.3}, {} interface nodes", p.imbalance(), p.interface_nodes().len());
    Ok(())
}

fn run(a: RunArgs) -> Outcome {
    let cfg = RunConfig::load(&a.config)?;
    let workers = a.workers.unwrap_or(cfg.workers);
    if !workers.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(workers).into());
    }
    let backend = match &a.backend {
        Some(b) => b.parse::<Backend>()?,
        None => cfg.backend,
    };
    let dir = a.output_dir.unwrap_or_else(|| io::output_dir(&cfg.output_dir));
    let mesh = read_mesh(&cfg.mesh.path)?;
    let catalog = match &a.cache {
        Some(path) => {
            let mut keyed = mesh.clone();
            if let Some(m) = &cfg.mesh.materials {
                keyed.materials = m.clone();
            }
            cache::refresh(path, &mesh_keys(&keyed)?)?
        }
        None => PatternCatalog::new(),
    };
    let problem = Problem::from_config(&cfg, mesh, catalog)?;
    let output = OutputSettings { record_every: cfg.record_every, snapshot_every: cfg.snapshot_every };
    let par = Parallelism { workers, backend, method: cfg.partition, spectral_limit: cfg.spectral_limit };
    let sol = solve(&problem, &cfg.time, &output, &par)?;
    let summary = write_outputs(&problem, &sol, &dir)?;
    println!(
        "{} elements, {} DOF, dt {:.4e} s ({} steps), {} worker(s), t_T {:.3} s, {} files in {}",
        summary.n_elements,
        summary.n_dof,
        summary.dt,
        summary.steps,
        summary.workers,
        summary.t_t,
        summary.files.len(),
        dir.display()
    );
    Ok(())
}

fn verify(selected: &[usize], soft_dof: usize) -> Outcome {
    let all: Vec<(usize, Box<dyn Fn() -> suites::Check>)> = vec![
        (1, Box::new(suites::pattern_algebra)),
        (2, Box::new(suites::catalog_sweep)),
        (3, Box::new(suites::scaling_rebuild)),
        (4, Box::new(suites::cube_convergence)),
        (5, Box::new(suites::beam_convergence)),
        (6, Box::new(suites::ebe_correctness)),
        (7, Box::new(suites::cdm_stability)),
        (8, Box::new(suites::parallel_equivalence)),
        (9, Box::new(suites::timing_formulas)),
        (10, Box::new(suites::signal_spectra)),
        (11, Box::new(move || suites::soft_scaling(soft_dof, 20))),
    ];
    if let Some(bad) = selected.iter().find(|&&s| !(1..=11).contains(&s)) {
        return Err(Failure::Usage(format!("no suite {bad}")));
    }
    let mut failed = 0;
    for (id, check) in all {
        let run = if selected.is_empty() { id != 11 } else { selected.contains(&id) };
        if !run {
            continue;
        }
        let c = check();
        let status = match (c.soft, c.pass) {
            (_, true) => "PASS",
            (true, false) => "SOFT-FAIL",
            (false, false) => "FAIL",
        };
        failed += usize::from(!c.soft && !c.pass);
        println!("{status} [{id}] {}: {}", c.name, c.detail);
    }
    if failed > 0 {
        return Err(Failure::Run(format!("{failed} suite(s) failed")));
    }
    Ok(())
}

fn signal(a: SignalArgs) -> Outcome {
    let s = match a.kind {
        SignalKind::Ricker => Signal::Ricker { t1: a.t1, p0: a.p0 },
        SignalKind::Triangle => Signal::Triangle { t1: a.t1, p0: a.p0 },
        SignalKind::SineBurst => Signal::SineBurst { t1: a.t1, p0: a.p0, n: a.cycles },
    };
    s.validate()?;
    if a.samples < 2 {
        return Err(Failure::Usage("need at least two samples".into()));
    }
    let f1 = critical_frequency(&s, a.fraction)?;
    if let Some(path) = &a.series {
        let mut text = String::from("t [s],p [Pa]\n");
        for i in 0..a.samples {
            let t = 1.5 * a.t1 * i as f64 / (a.samples - 1) as f64;
            text.push_str(&format!("{t:.10e},{:.10e}\n", s.eval(t)));
        }
        std::fs::write(path, text).map_err(Error::from)?;
    }
    if let Some(path) = &a.spectrum {
        let mut text = String::from("f [Hz],amplitude\n");
        for i in 0..a.samples {
            let f = 2.0 * f1 * i as f64 / (a.samples - 1) as f64;
            text.push_str(&format!("{f:.10e},{:.10e}\n", s.spectrum(f)?));
        }
        std::fs::write(path, text).map_err(Error::from)?;
    }
    println!("f1 = {f1:.6e} Hz ({:.4}/t1) at {:.0}% of the spectrum", f1 * a.t1, 100.0 * a.fraction);
    Ok(())
}

fn probe(path: &Path, name: Option<&str>, node: Option<u32>, output: Option<&Path>) -> Outcome {
    let results = read_results(path)?;
    let text = match (name, node) {
        (Some(n), _) => {
            let p = results.probe(n).ok_or_else(|| Failure::Usage(format!("no probe named {n:?}")))?;
            probe_csv(&p.rows)
        }
        (None, Some(node)) => {
            let h = results
                .node_history(node)
                .ok_or_else(|| Failure::Usage(format!("node {node} is not in the snapshots")))?;
            let mut text = String::from("t [s],u_x [m],u_y [m],u_z [m]\n");
            for (t, u) in h {
                text.push_str(&format!("{t:.16e},{:.16e},{:.16e},{:.16e}\n", u[0], u[1], u[2]));
            }
            text
        }
        (None, None) => return Err(Failure::Usage("need --name or --node".into())),
    };
    match output {
        Some(p) => std::fs::write(p, text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(())
}
