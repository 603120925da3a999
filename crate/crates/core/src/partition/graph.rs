//! Element dual graph: one vertex per leaf, one edge per shared face (full or
//! partial overlap across levels).

use std::collections::HashMap;

use crate::mesh::OctreeMesh;

#[derive(Debug, Clone, PartialEq)]
pub struct DualGraph {
    /// Sorted neighbour lists.
    pub adjacency: Vec<Vec<u32>>,
    pub centroids: Vec<[f64; 3]>,
}

impl DualGraph {
    pub fn n_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
}

type Key = (u8, [u32; 3]);

struct Tree {
    dim: usize,
    depth: u8,
    map: HashMap<Key, u32>,
}

impl Tree {
    fn covering(&self, level: u8, a: [u32; 3]) -> Option<u32> {
        (0..=level).rev().find_map(|l| {
            let s = level - l;
            self.map.get(&(l, [a[0] >> s, a[1] >> s, a[2] >> s])).copied()
        })
    }

    /// Leaves inside cell `(level, a)` that touch its face on `side` of `axis`.
    fn touching(&self, level: u8, a: [u32; 3], axis: usize, side: u32, out: &mut Vec<u32>) {
        if let Some(&v) = self.map.get(&(level, a)) {
            out.push(v);
            return;
        }
        if level >= self.depth {
            return;
        }
        for c in 0..(1u32 << self.dim) {
            let bits = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            if bits[axis] != side {
                continue;
            }
            let child = [2 * a[0] + bits[0], 2 * a[1] + bits[1], 2 * a[2] + bits[2]];
            self.touching(level + 1, child, axis, side, out);
        }
    }
}

/// Dual graph of an arbitrary 2:1-or-not quadtree (`dim = 2`, third anchor
/// component ignored) or octree (`dim = 3`) given as leaf keys.
pub fn tree_dual_graph(dim: usize, leaves: &[(u8, [u32; 3])], centroids: Vec<[f64; 3]>) -> DualGraph {
    assert!(dim == 2 || dim == 3);
    let depth = leaves.iter().map(|l| l.0).max().unwrap_or(0);
    let map: HashMap<Key, u32> = leaves.iter().enumerate().map(|(i, &k)| (k, i as u32)).collect();
    let tree = Tree { dim, depth, map };
    let mut adjacency = vec![Vec::new(); leaves.len()];
    let mut found = Vec::new();
    for (i, &(level, a)) in leaves.iter().enumerate() {
        let extent = 1u64 << level;
        for axis in 0..dim {
            for dir in [-1i64, 1] {
                let c = a[axis] as i64 + dir;
                if c < 0 || c as u64 >= extent {
                    continue;
                }
                let mut b = a;
                b[axis] = c as u32;
                found.clear();
                if let Some(v) = tree.covering(level, b) {
                    found.push(v);
                } else {
                    let side = if dir > 0 { 0 } else { 1 };
                    tree.touching(level, b, axis, side, &mut found);
                }
                for &v in &found {
                    if v as usize != i {
                        adjacency[i].push(v);
                        adjacency[v as usize].push(i as u32);
                    }
                }
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    DualGraph { adjacency, centroids }
}

pub fn dual_graph(mesh: &OctreeMesh) -> DualGraph {
    let leaves: Vec<Key> = mesh.cells.iter().map(|c| (c.level, c.anchor)).collect();
    tree_dual_graph(3, &leaves, mesh.cells.iter().map(|c| c.centroid()).collect())
}

/// Connected components of the subgraph induced by `subset` (local indices),
/// each sorted, ordered by their smallest member.
pub fn components(graph: &DualGraph, subset: &[u32]) -> Vec<Vec<u32>> {
    let local: HashMap<u32, usize> = subset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut seen = vec![false; subset.len()];
    let mut out = Vec::new();
    for start in 0..subset.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut comp = Vec::new();
        while let Some(i) = stack.pop() {
            comp.push(i as u32);
            for w in &graph.adjacency[subset[i] as usize] {
                if let Some(&j) = local.get(w) {
                    if !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{Material, MaterialTable};
    use crate::mesh::Leaf;

    fn mats() -> MaterialTable {
        MaterialTable::single(Material::new(1.0, 0.0, 1.0).unwrap())
    }

    #[test]
    fn two_cubes_one_edge() {
        let mesh = OctreeMesh::uniform_box([2, 1, 1], 1.0, mats());
        let g = dual_graph(&mesh);
        assert_eq!(g.n_vertices(), 2);
        assert_eq!(g.n_edges(), 1);
    }

    #[test]
    fn big_cell_sees_four_partial_neighbours() {
        // level-1 cell at the origin, its +x neighbour octant split into 8
        let mut leaves = vec![Leaf { level: 1, anchor: [0, 0, 0], material: 1 }];
        for c in 0..8u32 {
            leaves.push(Leaf { level: 2, anchor: [2 + (c & 1), (c >> 1) & 1, (c >> 2) & 1], material: 1 });
        }
        let mesh = OctreeMesh::from_leaves([0.0; 3], 2.0, leaves, mats());
        let g = dual_graph(&mesh);
        let big = mesh.cells.iter().position(|c| c.level == 1).unwrap();
        assert_eq!(g.degree(big), 4);
        for v in &g.adjacency[big] {
            assert_eq!(mesh.cells[*v as usize].anchor[0], 2);
        }
    }

    #[test]
    fn uniform_grid_edge_count() {
        let mesh = OctreeMesh::uniform_box([3, 2, 2], 1.0, mats());
        let g = dual_graph(&mesh);
        // 2·2·2 x-faces + 3·1·2 y-faces + 3·2·1 z-faces
        assert_eq!(g.n_edges(), 8 + 6 + 6);
        for (v, list) in g.adjacency.iter().enumerate() {
            for w in list {
                assert!(g.adjacency[*w as usize].binary_search(&(v as u32)).is_ok());
            }
        }
    }

    #[test]
    fn components_of_split_subset() {
        let mesh = OctreeMesh::uniform_box([4, 1, 1], 1.0, mats());
        let g = dual_graph(&mesh);
        let order: Vec<u32> = {
            let mut idx: Vec<u32> = (0..4).collect();
            idx.sort_by(|&a, &b| mesh.cells[a as usize].origin[0].total_cmp(&mesh.cells[b as usize].origin[0]));
            idx
        };
        let subset = vec![order[0], order[1], order[3]];
        let comps = components(&g, &subset);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps.iter().map(Vec::len).sum::<usize>(), 3);
    }
}
