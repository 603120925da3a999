//! Radial solution of the scaled boundary equation for a bounded cell.
//!
//! With `u(ξ) = ξ^s φ` the displacement equation becomes the quadratic
//! eigenproblem `[s²E0 + s(E0 − E1 + E1ᵀ) + (E1ᵀ − E2)] φ = 0`. It is
//! linearized on `[φ; q]` with `q = (s E0 + E1ᵀ) φ`, whose spectrum pairs
//! `s` with `−1 − s`. Bounded cells keep the half with `Re(s) ≥ 0`.

use nalgebra::{Complex, DMatrix, SVD};

use super::coefficients::CellCoefficients;
use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

const CLUSTER_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-8;
const MAX_COND: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct RadialSolution {
    /// Selected exponents; conjugate pairs sit in adjacent columns.
    pub s: Vec<C64>,
    pub phi_u: DMatrix<C64>,
    pub phi_q: DMatrix<C64>,
    /// Real basis of the same spaces: `(Re φ, Im φ)` per conjugate pair.
    pub phi_u_real: DMatrix<f64>,
    pub phi_q_real: DMatrix<f64>,
    pub cond: f64,
    /// Largest relative quadratic residual over the selected modes.
    pub residual: f64,
}

/// Defective exponents are only resolved to about the square root of machine
/// precision.
const MIN_RE_TOL: f64 = 1e-7;

pub fn quadratic_residual_matrix(c: &CellCoefficients, s: C64) -> DMatrix<C64> {
    let a = c.e0.map(|v| C64::new(v, 0.0));
    let b = (&c.e0 - &c.e1 + c.e1.transpose()).map(|v| C64::new(v, 0.0));
    let k = (c.e1.transpose() - &c.e2).map(|v| C64::new(v, 0.0));
    a * (s * s) + b * s + k
}

fn residual_scale(c: &CellCoefficients, s: C64) -> f64 {
    let b = &c.e0 - &c.e1 + c.e1.transpose();
    let k = c.e1.transpose() - &c.e2;
    s.norm_sqr() * c.e0.norm() + s.norm() * b.norm() + k.norm()
}

/// The `2n × 2n` first-order matrix acting on `[φ; q]`.
pub fn linearized_matrix(c: &CellCoefficients, cell: usize) -> Result<DMatrix<f64>> {
    let n = c.n_dof();
    let e0inv =
        c.e0.clone()
            .cholesky()
            .ok_or_else(|| Error::Eigen { cell, reason: "E0 is not positive definite".into() })?
            .inverse();
    let e1t = c.e1.transpose();
    let e1_e0inv = &c.e1 * &e0inv;
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, n)).copy_from(&(-&e0inv * &e1t));
    a.view_mut((0, n), (n, n)).copy_from(&e0inv);
    a.view_mut((n, 0), (n, n)).copy_from(&(&c.e2 - &e1_e0inv * &e1t));
    a.view_mut((n, n), (n, n)).copy_from(&(&e1_e0inv - DMatrix::identity(n, n)));
    Ok(a)
}

fn clusters(values: &[C64]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..values.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..values.len() {
        for j in 0..i {
            if (values[i] - values[j]).norm() <= CLUSTER_TOL * (1.0 + values[i].norm()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = std::collections::HashMap::new();
    for i in 0..values.len() {
        let r = find(&mut parent, i);
        let g = *root_of.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
}

/// `m` right singular vectors of `q` belonging to its smallest singular values.
fn null_vectors(q: DMatrix<C64>, m: usize) -> Vec<nalgebra::DVector<C64>> {
    let n = q.ncols();
    let svd = SVD::new(q, false, true);
    let vt = svd.v_t.expect("requested V");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    order[..m].iter().map(|&r| vt.row(r).transpose().map(|z| z.conj())).collect()
}

pub fn radial_eigensolve(c: &CellCoefficients, cell: usize) -> Result<RadialSolution> {
    let n = c.n_dof();
    let a = linearized_matrix(c, cell)?;
    let fa = faer::Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let all: Vec<C64> = fa
        .eigenvalues()
        .map_err(|e| Error::Eigen { cell, reason: format!("eigenvalue iteration failed: {e:?}") })?
        .into_iter()
        .map(|z| C64::new(z.re, z.im))
        .collect();
    let (selected, rejected): (Vec<C64>, Vec<C64>) = all.iter().partition(|z| z.re > -0.5);
    if selected.len() != n {
        return Err(Error::Eigen { cell, reason: format!("selected {} modes, expected {n}", selected.len()) });
    }
    let min_re = selected.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if min_re < -MIN_RE_TOL {
        return Err(Error::Eigen { cell, reason: format!("selected exponent with Re(s) = {min_re:e}") });
    }
    for s in &selected {
        let partner = -*s - 1.0;
        let ok = rejected.iter().any(|t| (t - partner).norm() <= CLUSTER_TOL * (1.0 + s.norm()));
        if !ok {
            return Err(Error::Eigen { cell, reason: format!("exponent {s} has no partner -1-s") });
        }
    }

    let mut s_out = Vec::with_capacity(n);
    let mut cols_u: Vec<nalgebra::DVector<C64>> = Vec::with_capacity(n);
    let mut residual: f64 = 0.0;
    let groups = clusters(&selected);
    for g in &groups {
        let mean = g.iter().map(|&i| selected[i]).sum::<C64>() / g.len() as f64;
        let m = g.len();
        if mean.im.abs() <= CLUSTER_TOL * (1.0 + mean.norm()) {
            let s = C64::new(mean.re, 0.0);
            let q = quadratic_residual_matrix(c, s).map(|z| C64::new(z.re, 0.0));
            for v in null_vectors(q, m) {
                let v = v.map(|z| C64::new(z.re, 0.0));
                s_out.push(s);
                cols_u.push(v);
            }
        } else if mean.im > 0.0 {
            let partner = groups.iter().find(|h| {
                let pm = h.iter().map(|&i| selected[i]).sum::<C64>() / h.len() as f64;
                (pm - mean.conj()).norm() <= CLUSTER_TOL * (1.0 + mean.norm())
            });
            match partner {
                Some(h) if h.len() == m => {}
                _ => return Err(Error::Eigen { cell, reason: format!("exponent {mean} lacks a conjugate partner") }),
            }
            for v in null_vectors(quadratic_residual_matrix(c, mean), m) {
                s_out.push(mean);
                cols_u.push(v.clone());
                s_out.push(mean.conj());
                cols_u.push(v.map(|z| z.conj()));
            }
        }
    }
    if cols_u.len() != n {
        return Err(Error::Eigen { cell, reason: format!("recovered {} modes, expected {n}", cols_u.len()) });
    }

    let e0c = c.e0.map(|v| C64::new(v, 0.0));
    let e1tc = c.e1.transpose().map(|v| C64::new(v, 0.0));
    let mut phi_u = DMatrix::zeros(n, n);
    let mut phi_q = DMatrix::zeros(n, n);
    for (j, (v, &s)) in cols_u.iter().zip(&s_out).enumerate() {
        let v = v / C64::new(v.norm(), 0.0);
        let r = (quadratic_residual_matrix(c, s) * &v).norm() / residual_scale(c, s);
        residual = residual.max(r);
        let q = (&e0c * s + &e1tc) * &v;
        phi_u.set_column(j, &v);
        phi_q.set_column(j, &q);
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::Eigen { cell, reason: format!("quadratic residual {residual:e} above tolerance") });
    }

    let mut phi_u_real = DMatrix::zeros(n, n);
    let mut phi_q_real = DMatrix::zeros(n, n);
    let mut j = 0;
    while j < n {
        if s_out[j].im == 0.0 {
            phi_u_real.set_column(j, &phi_u.column(j).map(|z| z.re));
            phi_q_real.set_column(j, &phi_q.column(j).map(|z| z.re));
            j += 1;
        } else {
            phi_u_real.set_column(j, &phi_u.column(j).map(|z| z.re));
            phi_u_real.set_column(j + 1, &phi_u.column(j).map(|z| z.im));
            phi_q_real.set_column(j, &phi_q.column(j).map(|z| z.re));
            phi_q_real.set_column(j + 1, &phi_q.column(j).map(|z| z.im));
            j += 2;
        }
    }
    let sv = phi_u_real.singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_COND) {
        return Err(Error::NearDefective { cell, cond });
    }
    Ok(RadialSolution { s: s_out, phi_u, phi_q, phi_u_real, phi_q_real, cond, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::elasticity;
    use crate::sbfem::coefficients::{cell_coefficients, CellGeometry};

    fn coeffs(mask: u16, nu: f64) -> CellCoefficients {
        cell_coefficients(&CellGeometry::cube(mask, 1.0), &elasticity(1.0, nu), 1.0).unwrap()
    }

    #[test]
    fn conforming_cube_has_three_translation_exponents() {
        let sol = radial_eigensolve(&coeffs(0, 0.3), 0).unwrap();
        assert_eq!(sol.s.len(), 24);
        let zeros = sol.s.iter().filter(|z| z.norm() < 1e-8).count();
        assert_eq!(zeros, 3);
        let ones = sol.s.iter().filter(|z| (*z - 1.0).norm() < 1e-8).count();
        assert_eq!(ones, 9);
        assert!(sol.s.iter().all(|z| z.re >= -1e-10));
    }

    #[test]
    fn selected_modes_satisfy_quadratic_residual() {
        for mask in [0u16, 0x001, 0x0c3, 0x555, 0xfff] {
            let c = coeffs(mask, 0.25);
            let sol = radial_eigensolve(&c, 0).unwrap();
            for (j, &s) in sol.s.iter().enumerate() {
                let r = quadratic_residual_matrix(&c, s) * sol.phi_u.column(j);
                assert!(r.norm() <= 1e-8 * residual_scale(&c, s) * sol.phi_u.column(j).norm());
            }
        }
    }

    #[test]
    fn complex_exponents_come_in_conjugate_pairs() {
        let mut saw_complex = false;
        for mask in [0u16, 0x001, 0x0c3, 0xfff] {
            let sol = radial_eigensolve(&coeffs(mask, 0.3), 0).unwrap();
            let mut j = 0;
            while j < sol.s.len() {
                if sol.s[j].im != 0.0 {
                    saw_complex = true;
                    assert_eq!(sol.s[j + 1], sol.s[j].conj());
                    j += 2;
                } else {
                    j += 1;
                }
            }
        }
        assert!(saw_complex, "test masks should exercise complex exponents");
    }
}
