//! Orbit classification of the 4096 edge masks under the 48 transforms.
//!
//! The representative of each orbit is its smallest mask; canonical ids
//! `1..=144` follow ascending representative.

use std::sync::OnceLock;

use super::transform::{transforms48, CellTransform};

pub const N_MASKS: usize = 4096;

struct Table {
    /// Per mask: (canonical id, transform id mapping the mask onto the representative).
    by_mask: Vec<(u8, u8)>,
    representatives: Vec<u16>,
    orbit_sizes: Vec<u16>,
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let all = transforms48();
        let mut best = vec![(0u16, 0u8); N_MASKS];
        for (mask, slot) in best.iter_mut().enumerate() {
            let mut min = (u16::MAX, 0u8);
            for t in all {
                let m = t.map_mask(mask as u16);
                if m < min.0 {
                    min = (m, t.id);
                }
            }
            *slot = min;
        }
        let mut representatives: Vec<u16> = best.iter().map(|b| b.0).collect();
        representatives.sort_unstable();
        representatives.dedup();
        let mut orbit_sizes = vec![0u16; representatives.len()];
        let by_mask = best
            .iter()
            .map(|&(rep, tid)| {
                let idx = representatives.binary_search(&rep).unwrap();
                orbit_sizes[idx] += 1;
                (idx as u8 + 1, tid)
            })
            .collect();
        Table { by_mask, representatives, orbit_sizes }
    })
}

/// `(canonical_id, transform_id)` such that the transform maps `mask` onto
/// the representative of `canonical_id`.
pub fn canonicalize(mask: u16) -> (u8, u8) {
    table().by_mask[(mask & 0x0fff) as usize]
}

pub fn canonical_mask(canonical_id: u8) -> u16 {
    table().representatives[canonical_id as usize - 1]
}

pub fn n_canonical() -> usize {
    table().representatives.len()
}

pub fn orbit_size(canonical_id: u8) -> usize {
    table().orbit_sizes[canonical_id as usize - 1] as usize
}

/// Canonical id of the all-conforming cell (mask 0).
pub fn conforming_id() -> u8 {
    canonicalize(0).0
}

/// Recover the actual mask from its canonical id and transform.
pub fn decanonicalize(canonical_id: u8, transform_id: u8) -> u16 {
    let t: &CellTransform = super::transform::transform(transform_id);
    t.transpose().map_mask(canonical_mask(canonical_id))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_144_orbits_covering_4096() {
        assert_eq!(n_canonical(), 144);
        let total: usize = (1..=144).map(orbit_size).sum();
        assert_eq!(total, N_MASKS);
    }

    #[test]
    fn mask_zero_is_fixed_with_identity() {
        assert_eq!(canonicalize(0), (1, 1));
        assert_eq!(orbit_size(1), 1);
    }

    #[test]
    fn round_trip_every_mask() {
        for mask in 0..N_MASKS as u16 {
            let (cid, tid) = canonicalize(mask);
            assert_eq!(decanonicalize(cid, tid), mask);
        }
    }

    #[test]
    fn complement_maps_five_to_seven_with_equal_orbit() {
        for cid in 1..=144u8 {
            let m = canonical_mask(cid);
            if m.count_ones() == 5 {
                let (c2, _) = canonicalize(!m & 0x0fff);
                assert_eq!(canonical_mask(c2).count_ones(), 7);
                assert_eq!(orbit_size(c2), orbit_size(cid));
            }
        }
    }
}
