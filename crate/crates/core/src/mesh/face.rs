//! Boundary tessellation of a cell face from its four half-edge flags.
//!
//! An undivided face is one bilinear quad. Any hanging node adds a face
//! center and the face becomes a fan of triangles around it: one triangle
//! per whole edge, two per halved edge.

use crate::topology::{face_flags, face_point_slot, FACE_CORNERS, FACE_MIDS, N_FACES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    Tri3,
    Quad4,
}

impl SurfaceKind {
    pub fn n_nodes(self) -> usize {
        match self {
            SurfaceKind::Tri3 => 3,
            SurfaceKind::Quad4 => 4,
        }
    }
}

/// A surface element in face-local half coordinates, counter-clockwise when
/// viewed from outside the cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacePatch {
    pub kind: SurfaceKind,
    pub points: Vec<(u8, u8)>,
}

pub fn face_discretization(flags: [bool; 4]) -> Vec<FacePatch> {
    if !flags.iter().any(|&f| f) {
        return vec![FacePatch { kind: SurfaceKind::Quad4, points: FACE_CORNERS.to_vec() }];
    }
    let mut ring = Vec::with_capacity(8);
    for i in 0..4 {
        ring.push(FACE_CORNERS[i]);
        if flags[i] {
            ring.push(FACE_MIDS[i]);
        }
    }
    (0..ring.len())
        .map(|i| FacePatch { kind: SurfaceKind::Tri3, points: vec![(1, 1), ring[i], ring[(i + 1) % ring.len()]] })
        .collect()
}

/// Arrangement class up to rotation: 0 none, 1 one, 2 adjacent, 3 opposite,
/// 4 three, 5 four halved edges.
pub fn arrangement_class(flags: [bool; 4]) -> u8 {
    let n = flags.iter().filter(|&&f| f).count();
    match n {
        0 => 0,
        1 => 1,
        2 if flags[0] == flags[2] => 3,
        2 => 2,
        3 => 4,
        _ => 5,
    }
}

/// Surface elements of a cell with the given edge mask, as slot indices.
pub fn cell_surface(mask: u16) -> Vec<(SurfaceKind, Vec<usize>)> {
    let mut out = Vec::new();
    for f in 0..N_FACES {
        for patch in face_discretization(face_flags(mask, f)) {
            let slots = patch.points.iter().map(|&(u, v)| face_point_slot(f, u, v)).collect();
            out.push((patch.kind, slots));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(p: &FacePatch) -> f64 {
        let pts: Vec<(f64, f64)> = p.points.iter().map(|&(u, v)| (u as f64, v as f64)).collect();
        let mut a = 0.0;
        for i in 0..pts.len() {
            let (x0, y0) = pts[i];
            let (x1, y1) = pts[(i + 1) % pts.len()];
            a += x0 * y1 - x1 * y0;
        }
        a / 2.0
    }

    fn all_flags() -> impl Iterator<Item = [bool; 4]> {
        (0..16u8).map(|b| [b & 1 != 0, b & 2 != 0, b & 4 != 0, b & 8 != 0])
    }

    #[test]
    fn element_counts() {
        assert_eq!(face_discretization([false; 4]).len(), 1);
        assert_eq!(face_discretization([true; 4]).len(), 8);
        let adj = face_discretization([true, true, false, false]);
        let opp = face_discretization([true, false, true, false]);
        assert_eq!(adj.len(), 6);
        assert_eq!(opp.len(), 6);
        assert_ne!(arrangement_class([true, true, false, false]), arrangement_class([true, false, true, false]));
    }

    #[test]
    fn areas_close_the_face_with_positive_orientation() {
        for flags in all_flags() {
            let patches = face_discretization(flags);
            assert!(patches.iter().all(|p| area(p) > 0.0));
            let total: f64 = patches.iter().map(area).sum();
            assert_eq!(total, 4.0);
            assert_eq!(
                patches.len(),
                if flags.iter().any(|&f| f) { 4 + flags.iter().filter(|&&f| f).count() } else { 1 }
            );
        }
    }

    #[test]
    fn six_classes_under_rotation() {
        let mut classes = std::collections::BTreeSet::new();
        for flags in all_flags() {
            let c = arrangement_class(flags);
            let rotated = [flags[3], flags[0], flags[1], flags[2]];
            assert_eq!(arrangement_class(rotated), c);
            classes.insert(c);
        }
        assert_eq!(classes.len(), 6);
    }

    #[test]
    fn cell_surface_only_uses_present_slots() {
        for mask in [0u16, 1, 0x0f0, 0xfff, 0x513] {
            let present = crate::topology::present_slots(mask);
            for (_, slots) in cell_surface(mask) {
                assert!(slots.iter().all(|s| present.contains(s)));
            }
        }
    }
}
