//! Top-down octree construction from voxel grids or analytic primitives.

use serde::{Deserialize, Serialize};

use super::{Leaf, OctreeMesh, MAX_DEPTH};
use crate::error::{invalid, Error, Result};
use crate::material::MaterialTable;

/// Material labels on a regular grid; `x` varies fastest. Label 0 is void.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub spacing: f64,
    #[serde(default)]
    pub origin: [f64; 3],
    pub labels: Vec<u16>,
}

impl VoxelGrid {
    pub fn new(dims: [usize; 3], spacing: f64, labels: Vec<u16>) -> Result<Self> {
        let g = Self { dims, spacing, origin: [0.0; 3], labels };
        g.validate()?;
        Ok(g)
    }

    pub fn filled(dims: [usize; 3], spacing: f64, f: impl Fn(usize, usize, usize) -> u16) -> Self {
        let mut labels = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    labels.push(f(i, j, k));
                }
            }
        }
        Self { dims, spacing, origin: [0.0; 3], labels }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(invalid("voxel dims must be positive"));
        }
        if !(self.spacing > 0.0) {
            return Err(invalid("voxel spacing must be positive"));
        }
        if self.labels.len() != self.dims.iter().product::<usize>() {
            return Err(Error::LengthMismatch { expected: self.dims.iter().product(), got: self.labels.len() });
        }
        Ok(())
    }

    pub fn label(&self, i: usize, j: usize, k: usize) -> u16 {
        if i >= self.dims[0] || j >= self.dims[1] || k >= self.dims[2] {
            0
        } else {
            self.labels[i + self.dims[0] * (j + self.dims[1] * k)]
        }
    }

    /// Levels needed for one root to cover the grid in power-of-two voxels.
    pub fn root_levels(&self) -> u8 {
        let m = *self.dims.iter().max().unwrap();
        (usize::BITS - (m - 1).leading_zeros()) as u8
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Primitive {
    Box { min: [f64; 3], max: [f64; 3], material: u16 },
    Sphere { center: [f64; 3], radius: f64, material: u16 },
}

enum Overlap {
    Inside,
    Outside,
    Partial,
}

impl Primitive {
    fn material(&self) -> u16 {
        match self {
            Primitive::Box { material, .. } | Primitive::Sphere { material, .. } => *material,
        }
    }

    fn contains(&self, p: [f64; 3]) -> bool {
        match self {
            Primitive::Box { min, max, .. } => (0..3).all(|a| p[a] >= min[a] && p[a] <= max[a]),
            Primitive::Sphere { center, radius, .. } => {
                (0..3).map(|a| (p[a] - center[a]).powi(2)).sum::<f64>() <= radius * radius
            }
        }
    }

    fn overlap(&self, lo: [f64; 3], hi: [f64; 3]) -> Overlap {
        match self {
            Primitive::Box { min, max, .. } => {
                if (0..3).all(|a| lo[a] >= min[a] && hi[a] <= max[a]) {
                    Overlap::Inside
                } else if (0..3).any(|a| hi[a] < min[a] || lo[a] > max[a]) {
                    Overlap::Outside
                } else {
                    Overlap::Partial
                }
            }
            Primitive::Sphere { center, radius, .. } => {
                let near: f64 = (0..3).map(|a| (center[a].clamp(lo[a], hi[a]) - center[a]).powi(2)).sum();
                let far: f64 = (0..3).map(|a| (center[a] - lo[a]).abs().max((center[a] - hi[a]).abs()).powi(2)).sum();
                if far <= radius * radius {
                    Overlap::Inside
                } else if near > radius * radius {
                    Overlap::Outside
                } else {
                    Overlap::Partial
                }
            }
        }
    }
}

/// Primitives inside a root cube; later entries override earlier ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrimitiveSet {
    pub root_origin: [f64; 3],
    pub root_size: f64,
    #[serde(default)]
    pub background: u16,
    pub primitives: Vec<Primitive>,
}

impl PrimitiveSet {
    pub fn label_at(&self, p: [f64; 3]) -> u16 {
        self.primitives.iter().rev().find(|q| q.contains(p)).map_or(self.background, Primitive::material)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Voxels(VoxelGrid),
    Primitives(PrimitiveSet),
}

/// Box forced to at least `level`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefineRegion {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub level: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildCriteria {
    pub max_level: u8,
    #[serde(default)]
    pub min_level: u8,
    /// Stop splitting homogeneous cells; when false every cell reaches `max_level`.
    #[serde(default = "yes")]
    pub homogeneity: bool,
    #[serde(default)]
    pub refine: Vec<RefineRegion>,
}

fn yes() -> bool {
    true
}

impl BuildCriteria {
    pub fn new(max_level: u8, min_level: u8) -> Self {
        Self { max_level, min_level, homogeneity: true, refine: Vec::new() }
    }
}

enum Node {
    Uniform(u16),
    Mixed(Vec<Leaf>),
}

struct Builder<'a> {
    classify: &'a dyn Fn(u8, [u32; 3]) -> Option<u16>,
    resolve: &'a dyn Fn(u8, [u32; 3]) -> u16,
    criteria: &'a BuildCriteria,
    root_origin: [f64; 3],
    root_size: f64,
}

impl Builder<'_> {
    fn forced(&self, level: u8, a: [u32; 3]) -> bool {
        if level < self.criteria.min_level || (!self.criteria.homogeneity && level < self.criteria.max_level) {
            return true;
        }
        let size = self.root_size / (1u64 << level) as f64;
        self.criteria.refine.iter().any(|r| {
            level < r.level
                && (0..3).all(|ax| {
                    let lo = self.root_origin[ax] + a[ax] as f64 * size;
                    lo < r.max[ax] && lo + size > r.min[ax]
                })
        })
    }

    fn visit(&self, level: u8, a: [u32; 3]) -> Node {
        if level == self.criteria.max_level {
            return Node::Uniform((self.resolve)(level, a));
        }
        let forced = self.forced(level, a);
        if !forced {
            if let Some(label) = (self.classify)(level, a) {
                return Node::Uniform(label);
            }
        }
        let kids: Vec<(Node, [u32; 3])> = (0..8u32)
            .map(|c| {
                let ca = [2 * a[0] + (c & 1), 2 * a[1] + ((c >> 1) & 1), 2 * a[2] + (c >> 2)];
                (self.visit(level + 1, ca), ca)
            })
            .collect();
        if !forced {
            if let Node::Uniform(first) = kids[0].0 {
                if kids.iter().all(|(k, _)| matches!(k, Node::Uniform(l) if *l == first)) {
                    return Node::Uniform(first);
                }
            }
        }
        let mut out = Vec::new();
        for (k, ca) in kids {
            match k {
                Node::Uniform(0) => {}
                Node::Uniform(material) => out.push(Leaf { level: level + 1, anchor: ca, material }),
                Node::Mixed(v) => out.extend(v),
            }
        }
        Node::Mixed(out)
    }
}

fn finish(b: &Builder<'_>, materials: &MaterialTable, labels_seen: impl Iterator<Item = u16>) -> Result<OctreeMesh> {
    for l in labels_seen.filter(|&l| l != 0) {
        materials.get(l)?;
    }
    let leaves = match b.visit(0, [0; 3]) {
        Node::Uniform(0) => Vec::new(),
        Node::Uniform(material) => vec![Leaf { level: 0, anchor: [0; 3], material }],
        Node::Mixed(v) => v,
    };
    if leaves.is_empty() {
        return Err(Error::EmptyGeometry);
    }
    Ok(OctreeMesh::from_leaves(b.root_origin, b.root_size, leaves, materials.clone()))
}

/// Unbalanced octree whose leaves are homogeneous or at `max_level`. Void
/// cells are dropped.
pub fn build_octree(geometry: &Geometry, criteria: &BuildCriteria, materials: &MaterialTable) -> Result<OctreeMesh> {
    if criteria.max_level < criteria.min_level {
        return Err(invalid(format!("max_level {} is below min_level {}", criteria.max_level, criteria.min_level)));
    }
    if criteria.max_level > MAX_DEPTH {
        return Err(invalid(format!("max_level above {MAX_DEPTH}")));
    }
    materials.validate()?;
    match geometry {
        Geometry::Voxels(g) => build_from_voxels(g, criteria, materials),
        Geometry::Primitives(p) => build_from_primitives(p, criteria, materials),
    }
}

fn build_from_voxels(g: &VoxelGrid, criteria: &BuildCriteria, materials: &MaterialTable) -> Result<OctreeMesh> {
    g.validate()?;
    if g.labels.iter().all(|&l| l == 0) {
        return Err(Error::EmptyGeometry);
    }
    let k = g.root_levels();
    let root_size = g.spacing * (1u64 << k) as f64;
    let histogram = |level: u8, a: [u32; 3]| -> Vec<(u16, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        if level >= k {
            let shift = level - k;
            let v = a.map(|x| (x >> shift) as usize);
            *counts.entry(g.label(v[0], v[1], v[2])).or_insert(0) += 1;
        } else {
            let n = 1usize << (k - level);
            let lo = a.map(|x| x as usize * n);
            for kk in lo[2]..lo[2] + n {
                for jj in lo[1]..lo[1] + n {
                    for ii in lo[0]..lo[0] + n {
                        *counts.entry(g.label(ii, jj, kk)).or_insert(0) += 1;
                    }
                }
            }
        }
        counts.into_iter().collect()
    };
    let classify = |level: u8, a: [u32; 3]| {
        let h = histogram(level, a);
        (h.len() == 1).then(|| h[0].0)
    };
    // majority label; ties go to the smallest non-void label
    let resolve = |level: u8, a: [u32; 3]| {
        let h = histogram(level, a);
        let best = h.iter().map(|&(_, c)| c).max().unwrap();
        let ties: Vec<u16> = h.iter().filter(|&&(_, c)| c == best).map(|&(l, _)| l).collect();
        ties.iter().copied().find(|&l| l != 0).unwrap_or(0)
    };
    let b = Builder { classify: &classify, resolve: &resolve, criteria, root_origin: g.origin, root_size };
    finish(&b, materials, g.labels.iter().copied())
}

fn build_from_primitives(p: &PrimitiveSet, criteria: &BuildCriteria, materials: &MaterialTable) -> Result<OctreeMesh> {
    if !(p.root_size > 0.0) {
        return Err(invalid("root size must be positive"));
    }
    let finest = p.root_size / (1u64 << criteria.max_level) as f64;
    let bounds = |level: u8, a: [u32; 3]| {
        let size = p.root_size / (1u64 << level) as f64;
        let lo = [0, 1, 2].map(|ax| p.root_origin[ax] + a[ax] as f64 * size);
        (lo, size)
    };
    // a cell is uniform when every finest sample center inside it shares one label
    let classify = |level: u8, a: [u32; 3]| {
        let (lo, size) = bounds(level, a);
        let inset_lo = lo.map(|x| x + 0.5 * finest);
        let inset_hi = [0, 1, 2].map(|ax| lo[ax] + size - 0.5 * finest);
        let mut label = p.background;
        for prim in &p.primitives {
            match prim.overlap(inset_lo, inset_hi) {
                Overlap::Inside => label = prim.material(),
                Overlap::Outside => {}
                Overlap::Partial => return None,
            }
        }
        Some(label)
    };
    let resolve = |level: u8, a: [u32; 3]| {
        let (lo, size) = bounds(level, a);
        p.label_at(lo.map(|x| x + 0.5 * size))
    };
    let b = Builder {
        classify: &classify,
        resolve: &resolve,
        criteria,
        root_origin: p.root_origin,
        root_size: p.root_size,
    };
    let labels = p.primitives.iter().map(Primitive::material).chain(std::iter::once(p.background));
    finish(&b, materials, labels)
}
