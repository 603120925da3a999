//! 2:1 balancing across faces and edges.

use std::collections::{HashMap, HashSet};

use super::{Leaf, OctreeMesh};
use crate::error::{Error, Result};

/// Face and edge neighbor offsets (corners excluded).
pub fn neighbor_dirs() -> Vec<[i64; 3]> {
    let mut out = Vec::with_capacity(18);
    for dz in -1..=1i64 {
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let nz = (dx != 0) as u8 + (dy != 0) as u8 + (dz != 0) as u8;
                if nz == 1 || nz == 2 {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

fn offset(anchor: [u32; 3], d: [i64; 3], level: u8) -> Option<[u32; 3]> {
    let lim = 1i64 << level;
    let mut out = [0u32; 3];
    for a in 0..3 {
        let v = anchor[a] as i64 + d[a];
        if v < 0 || v >= lim {
            return None;
        }
        out[a] = v as u32;
    }
    Some(out)
}

/// Level of the leaf that contains the same-level box at `anchor`, if that
/// leaf is at the same level or coarser.
fn covering_leaf(map: &HashMap<(u8, [u32; 3]), u16>, level: u8, anchor: [u32; 3]) -> Option<(u8, [u32; 3])> {
    let mut a = anchor;
    for l in (0..=level).rev() {
        if map.contains_key(&(l, a)) {
            return Some((l, a));
        }
        a = a.map(|x| x >> 1);
    }
    None
}

fn children(l: u8, a: [u32; 3]) -> impl Iterator<Item = (u8, [u32; 3])> {
    (0..8u32).map(move |c| (l + 1, [2 * a[0] + (c & 1), 2 * a[1] + ((c >> 1) & 1), 2 * a[2] + (c >> 2)]))
}

pub fn balance_leaves(leaves: &[Leaf]) -> Vec<Leaf> {
    let mut map: HashMap<(u8, [u32; 3]), u16> = leaves.iter().map(|l| ((l.level, l.anchor), l.material)).collect();
    let dirs = neighbor_dirs();
    let mut work: Vec<(u8, [u32; 3])> = {
        let mut v: Vec<_> = map.keys().copied().collect();
        v.sort_unstable();
        v
    };
    while let Some((l, a)) = work.pop() {
        if !map.contains_key(&(l, a)) || l < 2 {
            continue;
        }
        for d in &dirs {
            let Some(n) = offset(a, *d, l) else { continue };
            if let Some((nl, na)) = covering_leaf(&map, l, n) {
                if nl + 1 < l {
                    let mat = map.remove(&(nl, na)).unwrap();
                    for ch in children(nl, na) {
                        map.insert(ch, mat);
                        work.push(ch);
                    }
                    work.push((l, a));
                    break;
                }
            }
        }
    }
    map.into_iter().map(|((level, anchor), material)| Leaf { level, anchor, material }).collect()
}

pub fn balance_octree(mesh: &OctreeMesh) -> OctreeMesh {
    let leaves = balance_leaves(&mesh.leaves());
    OctreeMesh::from_leaves(mesh.root_origin, mesh.root_size, leaves, mesh.materials.clone())
}

/// First face- or edge-adjacent pair violating the 2:1 rule.
pub fn check_balance(mesh: &OctreeMesh) -> Result<()> {
    let index: HashMap<(u8, [u32; 3]), usize> =
        mesh.cells.iter().enumerate().map(|(i, c)| ((c.level, c.anchor), i)).collect();
    let dirs = neighbor_dirs();
    let present: HashSet<(u8, [u32; 3])> = index.keys().copied().collect();
    let map: HashMap<(u8, [u32; 3]), u16> = present.iter().map(|&k| (k, 0)).collect();
    for (i, c) in mesh.cells.iter().enumerate() {
        for d in &dirs {
            let Some(n) = offset(c.anchor, *d, c.level) else { continue };
            if let Some((nl, na)) = covering_leaf(&map, c.level, n) {
                if nl + 1 < c.level {
                    return Err(Error::Unbalanced { a: i, b: index[&(nl, na)], diff: c.level - nl });
                }
            }
        }
    }
    Ok(())
}

pub fn is_balanced(mesh: &OctreeMesh) -> bool {
    check_balance(mesh).is_ok()
}

/// Whether two cells touch along a face (`2`), an edge (`1`), only a corner
/// (`0`) or not at all (`None`), judged on the integer lattice.
pub fn contact_dimension(a: &Leaf, b: &Leaf, depth: u8) -> Option<u8> {
    let span = |l: &Leaf, ax: usize| {
        let s = 1u64 << (depth - l.level);
        (l.anchor[ax] as u64 * s, (l.anchor[ax] as u64 + 1) * s)
    };
    let mut positive = 0u8;
    for ax in 0..3 {
        let (a0, a1) = span(a, ax);
        let (b0, b1) = span(b, ax);
        let lo = a0.max(b0);
        let hi = a1.min(b1);
        if lo > hi {
            return None;
        }
        if lo < hi {
            positive += 1;
        }
    }
    if positive == 3 {
        None
    } else {
        Some(positive)
    }
}
