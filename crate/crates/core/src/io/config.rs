//! Run configuration. Unknown keys are rejected so typos fail loudly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assembly::{fix_plane, surface_traction, BoundaryConditions, NeumannLoad, Plane, Probe};
use crate::error::{invalid, Result};
use crate::excitation::Signal;
use crate::integrator::TimeSettings;
use crate::material::MaterialTable;
use crate::mesh::OctreeMesh;
use crate::parallel::Backend;
use crate::partition::PartitionMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedSpec {
    pub plane: Plane,
    #[serde(default = "all_components")]
    pub components: [bool; 3],
}

fn all_components() -> [bool; 3] {
    [true; 3]
}

/// Uniform traction on the boundary faces lying in `plane`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionSpec {
    pub plane: Plane,
    pub traction: [f64; 3],
    pub signal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ProbeSpec {
    Node {
        name: String,
        node: u32,
    },
    /// Snapped to the nearest node.
    Point {
        name: String,
        point: [f64; 3],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSource {
    /// Relative paths are taken from the config file's directory.
    pub path: PathBuf,
    /// Replaces the materials stored in the mesh file.
    #[serde(default)]
    pub materials: Option<MaterialTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub signals: Vec<Signal>,
    #[serde(default)]
    pub fixed: Vec<FixedSpec>,
    #[serde(default)]
    pub tractions: Vec<TractionSpec>,
    pub time: TimeSettings,
    #[serde(default)]
    pub probes: Vec<ProbeSpec>,
    #[serde(default = "one")]
    pub record_every: usize,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub partition: PartitionMethod,
    /// DOF count above which `auto` partitioning switches to geometric.
    #[serde(default = "spectral_limit")]
    pub spectral_limit: usize,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn one() -> usize {
    1
}

fn spectral_limit() -> usize {
    crate::partition::DEFAULT_SPECTRAL_LIMIT
}

fn default_output() -> PathBuf {
    PathBuf::from("output")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file and resolves the mesh path against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        if cfg.mesh.path.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.mesh.path = dir.join(&cfg.mesh.path);
            }
        }
        Ok(cfg)
    }

    /// Checks that need no mesh.
    pub fn validate(&self) -> Result<()> {
        for s in &self.signals {
            s.validate()?;
        }
        if let Some(m) = &self.mesh.materials {
            m.validate()?;
        }
        for t in &self.tractions {
            if t.signal >= self.signals.len() {
                return Err(invalid(format!("traction refers to signal {} of {}", t.signal, self.signals.len())));
            }
        }
        for p in self.fixed.iter().map(|f| f.plane).chain(self.tractions.iter().map(|t| t.plane)) {
            if p.axis > 2 || !p.coord.is_finite() {
                return Err(invalid(format!("bad plane {p:?}")));
            }
        }
        if self.record_every == 0 || self.snapshot_every == Some(0) {
            return Err(invalid("output cadence must be positive"));
        }
        if self.workers == 0 || !self.workers.is_power_of_two() {
            return Err(crate::Error::NotPowerOfTwo(self.workers));
        }
        let mut names: Vec<&str> = self.probes.iter().map(ProbeSpec::name).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("probe names must be unique"));
        }
        if names.iter().any(|n| n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c))) {
            return Err(invalid("probe names may use only letters, digits, '_', '-' and '.'"));
        }
        let t = &self.time;
        if !(t.duration > 0.0 && t.duration.is_finite()) || t.dt.is_some_and(|dt| !(dt > 0.0 && dt <= t.duration)) {
            return Err(invalid("time settings need a positive duration and step"));
        }
        if !(t.alpha >= 0.0 && t.safety > 0.0 && t.safety <= 1.0) {
            return Err(invalid("damping must be non-negative and the safety factor in (0, 1]"));
        }
        Ok(())
    }

    pub fn boundary_conditions(&self, mesh: &OctreeMesh) -> Result<BoundaryConditions> {
        let mut fixed = Vec::new();
        for f in &self.fixed {
            let dofs = fix_plane(mesh, f.plane, f.components);
            if dofs.is_empty() && f.components.iter().any(|&c| c) {
                return Err(invalid(format!("no nodes on fixed plane {:?}", f.plane)));
            }
            fixed.extend(dofs);
        }
        let mut loads: Vec<NeumannLoad> = Vec::new();
        for t in &self.tractions {
            let l = surface_traction(mesh, t.plane, t.traction, t.signal);
            if l.is_empty() {
                return Err(invalid(format!("no boundary faces on traction plane {:?}", t.plane)));
            }
            loads.extend(l);
        }
        let bcs = BoundaryConditions::new(fixed, loads);
        bcs.validate(mesh.n_dof(), self.signals.len())?;
        Ok(bcs)
    }

    pub fn resolve_probes(&self, mesh: &OctreeMesh) -> Result<Vec<Probe>> {
        self.probes
            .iter()
            .map(|p| match p {
                ProbeSpec::Node { name, node } => {
                    if *node as usize >= mesh.nodes.len() {
                        return Err(invalid(format!("probe {name}: node {node} out of range")));
                    }
                    Ok(Probe { name: name.clone(), node: *node })
                }
                ProbeSpec::Point { name, point } => {
                    let node = mesh.nearest_node(*point).ok_or_else(|| invalid("mesh has no nodes"))?;
                    Ok(Probe { name: name.clone(), node: node as u32 })
                }
            })
            .collect()
    }
}

impl ProbeSpec {
    pub fn name(&self) -> &str {
        match self {
            ProbeSpec::Node { name, .. } | ProbeSpec::Point { name, .. } => name,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BEAM: &str = r#"{
        "mesh": {"path": "beam.octm"},
        "signals": [{"kind": "ricker", "t1": 0.015, "p0": 1.0}],
        "fixed": [{"plane": {"axis": 0, "coord": 0.0}}],
        "tractions": [{"plane": {"axis": 0, "coord": 16.0}, "traction": [-1.0, 0.0, 0.0], "signal": 0}],
        "time": {"duration": 0.1},
        "probes": [{"name": "tip", "point": [16.0, 0.0, 0.0]}, {"name": "n0", "node": 0}],
        "snapshot_every": 50
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = RunConfig::from_json(BEAM).unwrap();
        assert_eq!(c.workers, 1);
        assert_eq!(c.backend, Backend::Sim);
        assert_eq!(c.fixed[0].components, [true; 3]);
        assert!(matches!(c.probes[0], ProbeSpec::Point { .. }));
        assert!(matches!(c.probes[1], ProbeSpec::Node { node: 0, .. }));
        let again = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_references() {
        assert!(RunConfig::from_json(&BEAM.replace("\"snapshot_every\"", "\"snapshot_evry\"")).is_err());
        assert!(RunConfig::from_json(&BEAM.replace("\"duration\": 0.1", "\"duration\": 0.1, \"dtt\": 1")).is_err());
        assert!(RunConfig::from_json(&BEAM.replace("\"signal\": 0", "\"signal\": 1")).is_err());
        assert!(RunConfig::from_json(&BEAM.replace("\"n0\"", "\"tip\"")).is_err());
        assert!(RunConfig::from_json(&BEAM.replace("\"node\": 0", "\"node\": 0, \"nod\": 1")).is_err());
        let three = BEAM.replace("\"snapshot_every\": 50", "\"workers\": 3");
        assert!(matches!(RunConfig::from_json(&three), Err(crate::Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn long_decimals_parse_to_the_nearest_double() {
        let long = "4444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444444416.0";
        let c = RunConfig::from_json(&BEAM.replace("\"duration\": 0.1", &format!("\"duration\": {long}"))).unwrap();
        assert_eq!(c.time.duration, long.parse::<f64>().unwrap());
        let again = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn relative_mesh_path_follows_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, BEAM).unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!(c.mesh.path, dir.path().join("beam.octm"));
    }
}
