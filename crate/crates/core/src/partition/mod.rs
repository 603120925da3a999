//! Dual-graph partitioning into `2^k` parts with node-cut interfaces.

pub mod bisect;
pub mod graph;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::mesh::OctreeMesh;

pub use bisect::{geometric_bisect, spectral_bisect};
pub use graph::{components, dual_graph, tree_dual_graph, DualGraph};

/// DOF count above which `Auto` switches from spectral to geometric.
pub const DEFAULT_SPECTRAL_LIMIT: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMethod {
    #[default]
    Auto,
    Spectral,
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub n_parts: usize,
    /// Part of each element.
    pub labels: Vec<u16>,
    pub part_sizes: Vec<usize>,
    /// Nodes shared by each unordered part pair `(a, b)`, `a < b`, ascending.
    pub interfaces: BTreeMap<(u16, u16), Vec<u32>>,
}

impl Partition {
    /// Derives sizes and interfaces from labels and element connectivity.
    pub fn from_labels(labels: Vec<u16>, n_parts: usize, cell_nodes: &[Vec<u32>]) -> Result<Self> {
        if labels.len() != cell_nodes.len() {
            return Err(Error::LengthMismatch { expected: cell_nodes.len(), got: labels.len() });
        }
        let mut part_sizes = vec![0usize; n_parts];
        for &l in &labels {
            *part_sizes.get_mut(l as usize).ok_or_else(|| invalid(format!("label {l} out of range")))? += 1;
        }
        let n_nodes = cell_nodes.iter().flatten().map(|&n| n as usize + 1).max().unwrap_or(0);
        let mut touching: Vec<Vec<u16>> = vec![Vec::new(); n_nodes];
        for (e, nodes) in cell_nodes.iter().enumerate() {
            for &n in nodes {
                let t = &mut touching[n as usize];
                if !t.contains(&labels[e]) {
                    t.push(labels[e]);
                }
            }
        }
        let mut interfaces: BTreeMap<(u16, u16), Vec<u32>> = BTreeMap::new();
        for (n, parts) in touching.iter_mut().enumerate() {
            parts.sort_unstable();
            for i in 0..parts.len() {
                for j in i + 1..parts.len() {
                    interfaces.entry((parts[i], parts[j])).or_default().push(n as u32);
                }
            }
        }
        Ok(Self { n_parts, labels, part_sizes, interfaces })
    }

    /// Nodes referenced by elements of two or more parts, ascending.
    pub fn interface_nodes(&self) -> Vec<u32> {
        let mut all: Vec<u32> = self.interfaces.values().flatten().copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    pub fn elements_of(&self, part: usize) -> Vec<u32> {
        (0..self.labels.len() as u32).filter(|&e| self.labels[e as usize] as usize == part).collect()
    }

    pub fn imbalance(&self) -> f64 {
        let max = *self.part_sizes.iter().max().unwrap_or(&0) as f64;
        let min = *self.part_sizes.iter().min().unwrap_or(&0) as f64;
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }
}

/// Recursive bisection labels for `n_parts = 2^k`. Part `p` at one level
/// splits into `2p` and `2p + 1`.
pub fn partition_graph(graph: &DualGraph, n_parts: usize, method: PartitionMethod) -> Result<Vec<u16>> {
    if n_parts == 0 || !n_parts.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n_parts));
    }
    if n_parts > graph.n_vertices() {
        return Err(invalid(format!("{n_parts} parts requested for {} elements", graph.n_vertices())));
    }
    if n_parts > u16::MAX as usize {
        return Err(invalid("too many parts"));
    }
    let mut parts: Vec<Vec<u32>> = vec![(0..graph.n_vertices() as u32).collect()];
    while parts.len() < n_parts {
        let mut next = Vec::with_capacity(2 * parts.len());
        for p in &parts {
            let (a, b) = match method {
                PartitionMethod::Geometric => geometric_bisect(graph, p),
                _ => spectral_bisect(graph, p),
            };
            next.push(a);
            next.push(b);
        }
        parts = next;
    }
    let mut labels = vec![0u16; graph.n_vertices()];
    for (i, p) in parts.iter().enumerate() {
        for &v in p {
            labels[v as usize] = i as u16;
        }
    }
    Ok(labels)
}

pub fn resolve_method(method: PartitionMethod, n_dof: usize, spectral_limit: usize) -> PartitionMethod {
    match method {
        PartitionMethod::Auto if n_dof < spectral_limit => PartitionMethod::Spectral,
        PartitionMethod::Auto => PartitionMethod::Geometric,
        m => m,
    }
}

pub fn partition(mesh: &OctreeMesh, n_parts: usize, method: PartitionMethod) -> Result<Partition> {
    partition_with_limit(mesh, n_parts, method, DEFAULT_SPECTRAL_LIMIT)
}

pub fn partition_with_limit(
    mesh: &OctreeMesh,
    n_parts: usize,
    method: PartitionMethod,
    spectral_limit: usize,
) -> Result<Partition> {
    if !mesh.is_numbered() {
        return Err(invalid("partitioning needs a numbered mesh"));
    }
    let method = resolve_method(method, mesh.n_dof(), spectral_limit);
    let labels =
        if n_parts == 1 { vec![0; mesh.cells.len()] } else { partition_graph(&dual_graph(mesh), n_parts, method)? };
    Partition::from_labels(labels, n_parts, &mesh.cell_nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::mesh::enumerate_nodes;

    fn cube4() -> OctreeMesh {
        let mats = MaterialTable::single(Material::new(1.0, 0.3, 1.0).unwrap());
        enumerate_nodes(&OctreeMesh::uniform_box([4, 4, 4], 1.0, mats)).unwrap()
    }

    #[test]
    fn single_part_has_no_interface() {
        let p = partition(&cube4(), 1, PartitionMethod::Auto).unwrap();
        assert_eq!(p.part_sizes, vec![64]);
        assert!(p.interfaces.is_empty());
    }

    #[test]
    fn not_power_of_two_is_rejected() {
        assert!(matches!(partition(&cube4(), 3, PartitionMethod::Auto), Err(Error::NotPowerOfTwo(3))));
        assert!(partition(&cube4(), 128, PartitionMethod::Auto).is_err());
    }

    #[test]
    fn geometric_cube_gives_slabs_and_quarters() {
        let mesh = cube4();
        let p = partition(&mesh, 2, PartitionMethod::Geometric).unwrap();
        assert_eq!(p.part_sizes, vec![32, 32]);
        // a median plane: the interface is one 5×5 layer of nodes
        assert_eq!(p.interface_nodes().len(), 25);
        let p = partition(&mesh, 4, PartitionMethod::Geometric).unwrap();
        assert_eq!(p.part_sizes, vec![16; 4]);
    }

    #[test]
    fn spectral_cube_balance_and_interface_oracle() {
        let mesh = cube4();
        for n in [2, 4, 8] {
            let p = partition(&mesh, n, PartitionMethod::Spectral).unwrap();
            assert_eq!(p.part_sizes.iter().sum::<usize>(), 64);
            assert!(p.part_sizes.iter().max().unwrap() - p.part_sizes.iter().min().unwrap() <= 1);
            // brute-force label scan
            let mut expect = Vec::new();
            for node in 0..mesh.nodes.len() as u32 {
                let mut l: Vec<u16> = (0..mesh.cells.len())
                    .filter(|&e| mesh.cell_nodes[e].contains(&node))
                    .map(|e| p.labels[e])
                    .collect();
                l.sort_unstable();
                l.dedup();
                if l.len() >= 2 {
                    expect.push(node);
                }
            }
            assert_eq!(p.interface_nodes(), expect);
        }
    }

    #[test]
    fn spectral_cuts_an_elongated_box_across_its_length() {
        let mats = MaterialTable::single(Material::new(1.0, 0.3, 1.0).unwrap());
        let mesh = enumerate_nodes(&OctreeMesh::uniform_box([8, 2, 2], 1.0, mats)).unwrap();
        let p = partition(&mesh, 2, PartitionMethod::Spectral).unwrap();
        assert_eq!(p.part_sizes, vec![16, 16]);
        assert_eq!(p.interface_nodes().len(), 9);
        let p = partition(&mesh, 4, PartitionMethod::Spectral).unwrap();
        assert_eq!(p.part_sizes, vec![8; 4]);
        assert_eq!(p.interface_nodes().len(), 27);
    }

    #[test]
    fn auto_switches_on_dof_count() {
        assert_eq!(resolve_method(PartitionMethod::Auto, 10, 100), PartitionMethod::Spectral);
        assert_eq!(resolve_method(PartitionMethod::Auto, 100, 100), PartitionMethod::Geometric);
        assert_eq!(resolve_method(PartitionMethod::Spectral, 1000, 100), PartitionMethod::Spectral);
    }

    /// Twelve-cell quadtree on [0,6]×[0,2]: one coarse cell, two refined
    /// blocks, one of which is refined again in a corner.
    fn quadtree_twelve() -> (DualGraph, Vec<Vec<u32>>) {
        let mut leaves: Vec<(u8, [u32; 3])> = vec![(2, [2, 0, 0])];
        for j in 0..2 {
            for i in 0..2 {
                leaves.push((3, [i, j, 0]));
            }
        }
        leaves.extend([(3, [3, 0, 0]), (3, [2, 1, 0]), (3, [3, 1, 0])]);
        for j in 0..2 {
            for i in 0..2 {
                leaves.push((4, [4 + i, j, 0]));
            }
        }
        // boxes on the level-4 lattice
        let boxes: Vec<([u32; 2], u32)> =
            leaves.iter().map(|&(l, a)| ([a[0] << (4 - l), a[1] << (4 - l)], 1u32 << (4 - l))).collect();
        let mut corners: Vec<[u32; 2]> = boxes
            .iter()
            .flat_map(|&(o, h)| [[o[0], o[1]], [o[0] + h, o[1]], [o[0], o[1] + h], [o[0] + h, o[1] + h]])
            .collect();
        corners.sort_unstable_by_key(|p| (p[1], p[0]));
        corners.dedup();
        let cell_nodes = boxes
            .iter()
            .map(|&(o, h)| {
                let on_boundary = |p: &[u32; 2]| {
                    let inside = (o[0]..=o[0] + h).contains(&p[0]) && (o[1]..=o[1] + h).contains(&p[1]);
                    inside && (p[0] == o[0] || p[0] == o[0] + h || p[1] == o[1] || p[1] == o[1] + h)
                };
                (0..corners.len() as u32).filter(|&n| on_boundary(&corners[n as usize])).collect()
            })
            .collect();
        let centroids =
            boxes.iter().map(|&(o, h)| [o[0] as f64 + h as f64 / 2.0, o[1] as f64 + h as f64 / 2.0, 0.0]).collect();
        (tree_dual_graph(2, &leaves, centroids), cell_nodes)
    }

    #[test]
    fn quadtree_dual_graph_and_balanced_low_cut() {
        let (g, cell_nodes) = quadtree_twelve();
        assert_eq!(g.n_vertices(), 12);
        assert_eq!(cell_nodes.iter().flatten().max(), Some(&21));
        // the coarse cell touches two refined cells; one small cell touches it
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.n_edges(), 19);
        let labels = partition_graph(&g, 2, PartitionMethod::Spectral).unwrap();
        let found = Partition::from_labels(labels, 2, &cell_nodes).unwrap();
        assert_eq!(found.part_sizes, vec![6, 6]);
        // exhaustive search over all balanced splits
        let mut best = usize::MAX;
        for bits in 0u32..(1 << 12) {
            if bits.count_ones() != 6 {
                continue;
            }
            let labels = (0..12).map(|e| ((bits >> e) & 1) as u16).collect();
            let p = Partition::from_labels(labels, 2, &cell_nodes).unwrap();
            best = best.min(p.interface_nodes().len());
        }
        assert_eq!(best, 5);
        let cut = found.interface_nodes().len();
        assert!(cut <= 6, "spectral cut has {cut} nodes");
    }
}
