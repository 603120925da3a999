//! The 48 signed permutation matrices acting on an octree cell.

use std::sync::OnceLock;

use crate::topology::{slot_of, EDGE_SLOT0, N_EDGES, N_SLOTS, SLOTS};

pub type Mat3i = [[i8; 3]; 3];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellTransform {
    /// 1-based id; id 1 is the identity.
    pub id: u8,
    pub matrix: Mat3i,
    /// `node_perm[s]` is the slot that slot `s` moves to under the matrix.
    pub node_perm: [u8; N_SLOTS],
    /// Row `a` of the matrix picks component `component[a]` with sign `sign[a]`.
    pub component: [u8; 3],
    pub sign: [i8; 3],
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

impl CellTransform {
    fn from_matrix(id: u8, matrix: Mat3i) -> Self {
        let mut component = [0u8; 3];
        let mut sign = [0i8; 3];
        for a in 0..3 {
            let c = (0..3).find(|&c| matrix[a][c] != 0).expect("signed permutation");
            component[a] = c as u8;
            sign[a] = matrix[a][c];
        }
        let mut node_perm = [0u8; N_SLOTS];
        for (s, h) in SLOTS.iter().enumerate() {
            let p = h.map(|x| x as i8 - 1);
            let q = apply(&matrix, p);
            node_perm[s] = slot_of(q.map(|x| (x + 1) as u8)).unwrap() as u8;
        }
        Self { id, matrix, node_perm, component, sign }
    }

    pub fn is_identity(&self) -> bool {
        self.id == 1
    }

    pub fn det(&self) -> i8 {
        det3(&self.matrix)
    }

    /// Image of edge `e` under the transform.
    pub fn edge_image(&self, e: usize) -> usize {
        self.node_perm[EDGE_SLOT0 + e] as usize - EDGE_SLOT0
    }

    pub fn map_mask(&self, mask: u16) -> u16 {
        let mut out = 0u16;
        for e in 0..N_EDGES {
            if mask & (1 << e) != 0 {
                out |= 1 << self.edge_image(e);
            }
        }
        out
    }

    pub fn transpose(&self) -> &'static CellTransform {
        let mut t = [[0i8; 3]; 3];
        for (a, row) in self.matrix.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                t[b][a] = v;
            }
        }
        by_matrix(&t)
    }

    /// `self · other` as matrices.
    pub fn compose(&self, other: &CellTransform) -> &'static CellTransform {
        by_matrix(&matmul(&self.matrix, &other.matrix))
    }
}

pub fn apply(m: &Mat3i, p: [i8; 3]) -> [i8; 3] {
    let mut out = [0i8; 3];
    for a in 0..3 {
        out[a] = m[a][0] * p[0] + m[a][1] * p[1] + m[a][2] * p[2];
    }
    out
}

pub fn matmul(a: &Mat3i, b: &Mat3i) -> Mat3i {
    let mut out = [[0i8; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn det3(m: &Mat3i) -> i8 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// All 48 transforms, identity first. Order: axis permutation (lexicographic),
/// then sign bits with bit `a` negating row `a`.
pub fn transforms48() -> &'static [CellTransform] {
    static ALL: OnceLock<Vec<CellTransform>> = OnceLock::new();
    ALL.get_or_init(|| {
        let mut out = Vec::with_capacity(48);
        for perm in PERMS {
            for bits in 0..8u8 {
                let mut m = [[0i8; 3]; 3];
                for a in 0..3 {
                    m[a][perm[a]] = if bits & (1 << a) != 0 { -1 } else { 1 };
                }
                out.push(CellTransform::from_matrix(out.len() as u8 + 1, m));
            }
        }
        out
    })
}

pub fn transform(id: u8) -> &'static CellTransform {
    &transforms48()[id as usize - 1]
}

pub fn by_matrix(m: &Mat3i) -> &'static CellTransform {
    transforms48().iter().find(|t| &t.matrix == m).expect("closed under composition")
}
