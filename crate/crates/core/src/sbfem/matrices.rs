//! Element stiffness, consistent and lumped mass, and maximum frequency.

use nalgebra::{DMatrix, DVector};

use super::coefficients::{cell_coefficients, CellCoefficients, CellGeometry};
use super::radial::{radial_eigensolve, RadialSolution, C64};
use crate::error::{Error, Result};
use crate::material::Material;

const ASYM_TOL: f64 = 1e-8;

pub fn relative_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (m - m.transpose()).norm() / n
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `K = Φq Φu⁻¹`, symmetrized after the asymmetry check.
pub fn stiffness(sol: &RadialSolution, cell: usize) -> Result<(DMatrix<f64>, f64)> {
    let lu = sol.phi_u_real.transpose().lu();
    let kt = lu.solve(&sol.phi_q_real.transpose()).ok_or(Error::NearDefective { cell, cond: f64::INFINITY })?;
    let k = kt.transpose();
    let asym = relative_asymmetry(&k);
    if asym > ASYM_TOL {
        return Err(Error::Asymmetric { cell, asym });
    }
    Ok((symmetrize(&k), asym))
}

/// Consistent mass from the radial integral `∫ ξ^{s_i+s_j+2} dξ`.
pub fn consistent_mass(sol: &RadialSolution, m0: &DMatrix<f64>, cell: usize) -> Result<DMatrix<f64>> {
    let n = sol.s.len();
    let m0c = m0.map(|v| C64::new(v, 0.0));
    let mut m = sol.phi_u.transpose() * m0c * &sol.phi_u;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= sol.s[i] + sol.s[j] + 3.0;
        }
    }
    let x = sol.phi_u.clone().try_inverse().ok_or(Error::NearDefective { cell, cond: f64::INFINITY })?;
    let full = x.transpose() * m * x;
    let re = full.map(|z| z.re);
    let im = full.map(|z| z.im);
    if im.norm() > 1e-8 * re.norm() {
        return Err(Error::Eigen { cell, reason: format!("mass has imaginary part {:e}", im.norm()) });
    }
    let out = symmetrize(&re);
    if out.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite { cell });
    }
    Ok(out)
}

/// Row sums restricted to columns of the same coordinate direction.
pub fn lump_mass(m: &DMatrix<f64>, cell: usize) -> Result<DVector<f64>> {
    let n = m.nrows();
    let mut out = DVector::zeros(n);
    for i in 0..n {
        let v: f64 = (i % 3..n).step_by(3).map(|j| m[(i, j)]).sum();
        if !(v > 0.0) {
            return Err(Error::NonPositiveLumped { cell, dof: i, value: v });
        }
        out[i] = v;
    }
    Ok(out)
}

/// Largest `ω` of `K φ = ω² M φ` for diagonal `M`.
pub fn element_max_frequency(k: &DMatrix<f64>, m_diag: &DVector<f64>) -> f64 {
    let inv = m_diag.map(|m| 1.0 / m.sqrt());
    let scaled = DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| inv[i] * k[(i, j)] * inv[j]);
    let lam = scaled.symmetric_eigenvalues().max();
    lam.max(0.0).sqrt()
}

/// Number of eigenvalues of a symmetric matrix below `rel · λ_max`.
pub fn count_small_eigenvalues(k: &DMatrix<f64>, rel: f64) -> usize {
    let ev = k.clone().symmetric_eigenvalues();
    let max = ev.max();
    ev.iter().filter(|&&v| v < rel * max).count()
}

#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub k: DMatrix<f64>,
    pub m_cons: DMatrix<f64>,
    pub m_diag: DVector<f64>,
    pub omega_max: f64,
    pub asymmetry: f64,
    pub cond: f64,
}

pub fn build_element(geom: &CellGeometry, mat: &Material, cell: usize) -> Result<ElementMatrices> {
    let coeffs: CellCoefficients = cell_coefficients(geom, &mat.elasticity(), mat.rho).map_err(|e| match e {
        Error::BadJacobian { element, det, .. } => Error::BadJacobian { cell, element, det },
        other => other,
    })?;
    let sol = radial_eigensolve(&coeffs, cell)?;
    let (k, asymmetry) = stiffness(&sol, cell)?;
    let m_cons = consistent_mass(&sol, &coeffs.m0, cell)?;
    let m_diag = lump_mass(&m_cons, cell)?;
    let omega_max = element_max_frequency(&k, &m_diag);
    Ok(ElementMatrices { k, m_cons, m_diag, omega_max, asymmetry, cond: sol.cond })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::elasticity;
    use crate::topology::{present_slots, SLOTS};

    fn unit(mask: u16, nu: f64) -> ElementMatrices {
        build_element(&CellGeometry::cube(mask, 1.0), &Material::new(1.0, nu, 1.0).unwrap(), 0).unwrap()
    }

    fn rigid_modes(mask: u16) -> Vec<DVector<f64>> {
        let pts: Vec<[f64; 3]> =
            present_slots(mask).iter().map(|&s| SLOTS[s].map(|h| (h as f64 - 1.0) * 0.5)).collect();
        let n = 3 * pts.len();
        let mut out = Vec::new();
        for d in 0..3 {
            out.push(DVector::from_fn(n, |i, _| if i % 3 == d { 1.0 } else { 0.0 }));
        }
        for axis in 0..3 {
            out.push(DVector::from_fn(n, |i, _| {
                let p = pts[i / 3];
                let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
                if i % 3 == a {
                    -p[b]
                } else if i % 3 == b {
                    p[a]
                } else {
                    0.0
                }
            }));
        }
        out
    }

    #[test]
    fn rigid_modes_are_in_the_nullspace() {
        for mask in [0u16, 0x001, 0x0f0, 0xfff] {
            let e = unit(mask, 0.3);
            for r in rigid_modes(mask) {
                assert!((&e.k * &r).norm() <= 1e-8 * e.k.norm() * r.norm());
            }
            assert_eq!(count_small_eigenvalues(&e.k, 1e-8), 6);
        }
    }

    #[test]
    fn conforming_cube_lumps_to_one_eighth() {
        for nu in [0.0, 0.3] {
            let e = unit(0, nu);
            for &m in e.m_diag.iter() {
                assert!((m - 0.125).abs() < 1e-12);
            }
        }
        let a = unit(0, 0.0);
        let b = unit(0, 0.3);
        assert!((&a.k - &b.k).norm() > 1e-3);
    }

    #[test]
    fn mass_conservation_and_scaling() {
        let e = unit(0x0a3, 0.2);
        for d in 0..3 {
            let one = DVector::from_fn(e.k.nrows(), |i, _| if i % 3 == d { 1.0 } else { 0.0 });
            assert!(((one.transpose() * &e.m_cons * &one)[0] - 1.0).abs() < 1e-10);
            let s: f64 = e.m_diag.iter().skip(d).step_by(3).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
        let big = build_element(&CellGeometry::cube(0x0a3, 2.0), &Material::new(1.0, 0.2, 2.0).unwrap(), 0).unwrap();
        assert!((&big.m_cons - &e.m_cons * 16.0).norm() <= 1e-10 * big.m_cons.norm());
    }

    #[test]
    fn max_frequency_examples() {
        let k = DMatrix::from_element(1, 1, 4.0);
        let m = DVector::from_element(1, 1.0);
        assert_eq!(element_max_frequency(&k, &m), 2.0);
        let e1 = unit(0, 0.3);
        let e4 = build_element(&CellGeometry::cube(0, 1.0), &Material::new(4.0, 0.3, 1.0).unwrap(), 0).unwrap();
        assert!((e4.omega_max / e1.omega_max - 2.0).abs() < 1e-10);
    }

    #[test]
    fn max_frequency_matches_generalized_dense_solve() {
        let e = unit(0x811, 0.3);
        // Cholesky-based reduction of the generalized problem as an independent route
        let m = DMatrix::from_diagonal(&e.m_diag);
        let l = m.cholesky().unwrap();
        let linv = l.l().try_inverse().unwrap();
        let c = &linv * &e.k * linv.transpose();
        let lam = c.symmetric_eigenvalues().max();
        assert!((lam.sqrt() - e.omega_max).abs() <= 1e-10 * e.omega_max);
    }

    /// Residual of the algebraic Riccati equation satisfied by the stiffness of
    /// a bounded domain, relative to `‖K‖`.
    fn riccati_residual(c: &CellCoefficients, k: &DMatrix<f64>) -> f64 {
        let e0i = c.e0.clone().try_inverse().unwrap();
        let e1t = c.e1.transpose();
        let r = &c.e2 - &c.e1 * &e0i * &e1t + &c.e1 * &e0i * k - k - k * &e0i * k + k * &e0i * &e1t;
        r.norm() / k.norm()
    }

    #[test]
    fn stiffness_satisfies_riccati_equation() {
        for mask in [0u16, 0x001, 0x0c3, 0x7ff, 0xfff] {
            let c = cell_coefficients(&CellGeometry::cube(mask, 1.0), &elasticity(1.0, 0.3), 1.0).unwrap();
            let e = unit(mask, 0.3);
            let err = riccati_residual(&c, &e.k);
            assert!(err <= 1e-10, "mask {mask:#x}: {err:e}");
        }
    }

    #[test]
    fn consistent_mass_matches_volume_quadrature() {
        use crate::sbfem::coefficients::point_operators;
        use crate::sbfem::shape::quadrature;
        let geom = CellGeometry::cube(0, 1.0);
        let c = cell_coefficients(&geom, &elasticity(1.0, 0.3), 1.0).unwrap();
        let sol = radial_eigensolve(&c, 0).unwrap();
        let e = unit(0, 0.3);
        let n = c.n_dof();
        let x = sol.phi_u.clone().try_inverse().unwrap();
        // Gauss-Legendre nodes on (0,1) via Golub-Welsch
        let order = 40;
        let jac = DMatrix::from_fn(order, order, |i, j| {
            if i + 1 == j || j + 1 == i {
                let k = i.max(j) as f64;
                k / (4.0 * k * k - 1.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = jac.symmetric_eigen();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for g in 0..order {
            let xi = 0.5 * (eig.eigenvalues[g] + 1.0);
            let wxi = eig.eigenvectors[(0, g)].powi(2);
            // boundary displacement -> displacement at radius xi
            let scale = DMatrix::from_fn(n, n, |i, j| if i == j { sol.s[i].powf_xi(xi) } else { C64::new(0.0, 0.0) });
            let t = (&sol.phi_u * scale * &x).map(|z| z.re);
            for (el, (kind, ids)) in geom.surfaces.iter().enumerate() {
                for (eta, zeta, w) in quadrature(*kind) {
                    let op = point_operators(&geom, el, eta, zeta).unwrap();
                    let mut nmat = DMatrix::zeros(3, n);
                    for (a, &id) in ids.iter().enumerate() {
                        for d in 0..3 {
                            nmat[(d, 3 * id + d)] = op.n[a];
                        }
                    }
                    let u = nmat * &t;
                    m += u.transpose() * u * (wxi * w * op.det_j * xi * xi);
                }
            }
        }
        assert!((&m - &e.m_cons).norm() <= 1e-9 * e.m_cons.norm());
    }

    trait PowXi {
        fn powf_xi(self, xi: f64) -> C64;
    }
    impl PowXi for C64 {
        fn powf_xi(self, xi: f64) -> C64 {
            (self * xi.ln()).exp()
        }
    }
}
