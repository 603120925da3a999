//! Fixed numbering of the 26 node slots of an octree cell.
//!
//! Slots live on the half-unit lattice `{0,1,2}^3` of the cell:
//! corners `0..8` (`c = x + 2y + 4z`), edge midpoints `8..20` and face
//! centers `20..26`. Edge `e` (slot `8 + e`) runs along axis `e / 4`; the
//! two remaining axes, taken in increasing order, sit at `2*(r & 1)` and
//! `2*(r >> 1)` with `r = e % 4`. Face `f` (slot `20 + f`) has normal axis
//! `f / 2` and lies on the low side when `f` is even. Bit `e` of an edge
//! mask refers to edge `e`.

pub const N_SLOTS: usize = 26;
pub const N_EDGES: usize = 12;
pub const N_FACES: usize = 6;
pub const EDGE_SLOT0: usize = 8;
pub const FACE_SLOT0: usize = 20;

pub type Half = [u8; 3];

const fn other_axes(a: usize) -> (usize, usize) {
    match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

const fn build_slots() -> [Half; N_SLOTS] {
    let mut out = [[0u8; 3]; N_SLOTS];
    let mut c = 0;
    while c < 8 {
        out[c] = [2 * (c & 1) as u8, 2 * ((c >> 1) & 1) as u8, 2 * ((c >> 2) & 1) as u8];
        c += 1;
    }
    let mut e = 0;
    while e < N_EDGES {
        let a = e / 4;
        let r = e % 4;
        let (b, c) = other_axes(a);
        let mut h = [0u8; 3];
        h[a] = 1;
        h[b] = 2 * (r & 1) as u8;
        h[c] = 2 * (r >> 1) as u8;
        out[EDGE_SLOT0 + e] = h;
        e += 1;
    }
    let mut f = 0;
    while f < N_FACES {
        let mut h = [1u8; 3];
        h[f / 2] = 2 * (f % 2) as u8;
        out[FACE_SLOT0 + f] = h;
        f += 1;
    }
    out
}

pub const SLOTS: [Half; N_SLOTS] = build_slots();

pub fn slot_of(h: Half) -> Option<usize> {
    SLOTS.iter().position(|&s| s == h)
}

/// In-plane axes `(u, v)` of face `f`, ordered so that `u × v` points outward.
pub const fn face_frame(f: usize) -> (usize, usize) {
    let a = f / 2;
    if f % 2 == 1 {
        ((a + 1) % 3, (a + 2) % 3)
    } else {
        ((a + 2) % 3, (a + 1) % 3)
    }
}

/// Slot at face-local half coordinates `(pu, pv)` on face `f`.
pub fn face_point_slot(f: usize, pu: u8, pv: u8) -> usize {
    let (u, v) = face_frame(f);
    let mut h = [0u8; 3];
    h[f / 2] = 2 * (f % 2) as u8;
    h[u] = pu;
    h[v] = pv;
    slot_of(h).expect("face point on lattice")
}

/// Face-local midpoints in counter-clockwise order: bottom, right, top, left.
pub const FACE_MIDS: [(u8, u8); 4] = [(1, 0), (2, 1), (1, 2), (0, 1)];
/// Face-local corners in counter-clockwise order.
pub const FACE_CORNERS: [(u8, u8); 4] = [(0, 0), (2, 0), (2, 2), (0, 2)];

/// Edge indices of face `f` in the order of [`FACE_MIDS`].
pub fn face_edges(f: usize) -> [usize; 4] {
    FACE_MIDS.map(|(pu, pv)| face_point_slot(f, pu, pv) - EDGE_SLOT0)
}

/// Per-face half-edge flags read from a cell edge mask.
pub fn face_flags(mask: u16, f: usize) -> [bool; 4] {
    face_edges(f).map(|e| mask & (1 << e) != 0)
}

/// Slots present in a cell with the given edge mask, ascending. This is the
/// master-local node order.
pub fn present_slots(mask: u16) -> Vec<usize> {
    let mut out: Vec<usize> = (0..8).collect();
    out.extend((0..N_EDGES).filter(|e| mask & (1 << e) != 0).map(|e| EDGE_SLOT0 + e));
    out.extend((0..N_FACES).filter(|&f| face_flags(mask, f).iter().any(|&b| b)).map(|f| FACE_SLOT0 + f));
    out
}

/// The two corner slots bounding edge `e`.
pub fn edge_corners(e: usize) -> [usize; 2] {
    let h = SLOTS[EDGE_SLOT0 + e];
    let a = e / 4;
    let mut lo = h;
    let mut hi = h;
    lo[a] = 0;
    hi[a] = 2;
    [slot_of(lo).unwrap(), slot_of(hi).unwrap()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slots_are_distinct_and_cover_lattice_minus_center() {
        let mut seen = std::collections::HashSet::new();
        for s in SLOTS {
            assert!(seen.insert(s));
            assert_ne!(s, [1, 1, 1]);
        }
        assert_eq!(seen.len(), 26);
    }

    #[test]
    fn face_frame_is_right_handed_outward() {
        for f in 0..6 {
            let (u, v) = face_frame(f);
            let mut eu = [0i32; 3];
            let mut ev = [0i32; 3];
            eu[u] = 1;
            ev[v] = 1;
            let n = [eu[1] * ev[2] - eu[2] * ev[1], eu[2] * ev[0] - eu[0] * ev[2], eu[0] * ev[1] - eu[1] * ev[0]];
            let sign = if f % 2 == 1 { 1 } else { -1 };
            assert_eq!(n[f / 2], sign);
        }
    }

    #[test]
    fn each_edge_lies_on_two_faces() {
        let mut count = [0; N_EDGES];
        for f in 0..6 {
            for e in face_edges(f) {
                count[e] += 1;
            }
        }
        assert!(count.iter().all(|&c| c == 2));
    }

    #[test]
    fn present_slots_counts() {
        assert_eq!(present_slots(0).len(), 8);
        assert_eq!(present_slots(0xfff).len(), 26);
        assert_eq!(present_slots(1).len(), 8 + 1 + 2);
    }
}
