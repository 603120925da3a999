use octree_sbfem::pattern::{build_master_cell, canonical_mask};
use octree_sbfem::sbfem::{build_element, count_small_eigenvalues, CellGeometry};
use octree_sbfem::Material;

#[test]
fn every_pattern_builds_with_rigid_modes_and_conserved_mass() {
    let mut failures = Vec::new();
    for nu in [0.0, 0.3] {
        for cid in 1..=144u8 {
            match build_master_cell(cid, nu) {
                Ok(m) => {
                    let n = m.k.nrows();
                    let raw =
                        build_element(&CellGeometry::cube(m.edge_mask, 1.0), &Material::new(1.0, nu, 1.0).unwrap(), 0)
                            .unwrap();
                    let asym = raw.asymmetry;
                    let zeros = count_small_eigenvalues(&m.k, 1e-8);
                    let mut dir = [0.0; 3];
                    for i in 0..n {
                        dir[i % 3] += m.m_diag[i];
                    }
                    let ok = asym <= 1e-8
                        && zeros == 6
                        && m.m_diag.iter().all(|&v| v > 0.0)
                        && dir.iter().all(|d| (d - 1.0).abs() <= 1e-10);
                    if !ok {
                        failures.push(format!(
                            "cid {cid} mask {:#x} nu {nu}: asym {asym:e} zeros {zeros} dir {dir:?}",
                            canonical_mask(cid)
                        ));
                    }
                }
                Err(e) => failures.push(format!("cid {cid} mask {:#x} nu {nu}: {e}", canonical_mask(cid))),
            }
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
