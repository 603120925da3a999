//! Lowest eigenfrequencies of `K x = ω² M x` by block shift-invert Lanczos
//! with full reorthogonalization, and a dense cross-check.

use faer::prelude::Solve;
use faer::Side;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::SymCsr;
use crate::error::{invalid, Result};

pub enum MassOperator<'a> {
    Lumped(&'a [f64]),
    Consistent(&'a SymCsr),
}

impl MassOperator<'_> {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self {
            MassOperator::Lumped(d) => {
                for i in 0..x.len() {
                    y[i] = d[i] * x[i];
                }
            }
            MassOperator::Consistent(m) => m.matvec(x, y),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// M-orthonormal vectors with their images under M.
#[derive(Default)]
struct Basis {
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
}

impl Basis {
    fn len(&self) -> usize {
        self.v.len()
    }
}

/// Classical Gram-Schmidt in the M inner product, repeated once if
/// cancellation was severe. Writes the coefficients on each set and returns
/// the remaining M-norm together with M·w.
fn orthogonalize(w: &mut [f64], sets: &[&Basis], coef: &mut Vec<f64>, m: &MassOperator<'_>) -> (f64, Vec<f64>) {
    let total: usize = sets.iter().map(|s| s.len()).sum();
    coef.clear();
    coef.resize(total, 0.0);
    let mut mw = vec![0.0; w.len()];
    m.apply(w, &mut mw);
    let mut before = dot(w, &mw).sqrt();
    for _ in 0..3 {
        let mut k = 0;
        for set in sets {
            for (vj, mvj) in set.v.iter().zip(&set.mv) {
                let c = dot(mvj, w);
                coef[k] += c;
                for (x, y) in w.iter_mut().zip(vj) {
                    *x -= c * y;
                }
                k += 1;
            }
        }
        m.apply(w, &mut mw);
        let norm = dot(w, &mw).sqrt();
        if norm > 0.5 * before {
            return (norm, mw);
        }
        before = norm;
    }
    let norm = dot(w, &mw).sqrt();
    (norm, mw)
}

const RESIDUAL_TOL: f64 = 1e-9;
/// Below this size the dense solver is cheaper and always succeeds.
const DENSE_LIMIT: usize = 1500;

/// The `count` smallest angular frequencies `ω = sqrt(λ)`, ascending.
pub fn lowest_frequencies(k: &SymCsr, m: &MassOperator<'_>, count: usize, block: usize) -> Result<Vec<f64>> {
    let n = k.n;
    if n <= DENSE_LIMIT && count <= n {
        let md = match m {
            MassOperator::Lumped(d) => DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
            MassOperator::Consistent(c) => c.to_dense(),
        };
        return dense_frequencies(&k.to_dense(), &md, count);
    }
    lanczos(k, m, count, block)
}

/// Block shift-invert Lanczos on `K⁻¹M`, whatever the size.
pub fn lanczos(k: &SymCsr, m: &MassOperator<'_>, count: usize, block: usize) -> Result<Vec<f64>> {
    let n = k.n;
    if count == 0 || count + block >= n {
        return Err(invalid(format!("cannot extract {count} modes from {n} DOFs")));
    }
    let llt = k
        .to_faer_lower()?
        .sp_cholesky(Side::Lower)
        .map_err(|e| invalid(format!("stiffness is not positive definite: {e:?}")))?;
    let max_dim = (8 * count + 4 * block).min(n - block);
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let mut coef = Vec::new();
    let mut random_unit = |basis: &Basis, partial: &Basis, coef: &mut Vec<f64>| {
        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (norm, mut mw) = orthogonalize(&mut w, &[basis, partial], coef, m);
        w.iter_mut().for_each(|x| *x /= norm);
        mw.iter_mut().for_each(|x| *x /= norm);
        (w, mw)
    };

    let mut basis = Basis::default();
    let mut pending = Basis::default();
    for _ in 0..block {
        let (w, mw) = random_unit(&basis, &pending, &mut coef);
        pending.v.push(w);
        pending.mv.push(mw);
    }
    // H[i][j] = v_iᵀ M K⁻¹ M v_j for i ≤ j
    let mut h: Vec<Vec<f64>> = Vec::new();
    loop {
        let start = basis.len();
        basis.v.append(&mut pending.v);
        basis.mv.append(&mut pending.mv);
        let dim = basis.len();
        for row in h.iter_mut() {
            row.resize(dim, 0.0);
        }
        h.resize(dim, vec![0.0; dim]);

        let mut rhs = faer::Mat::<f64>::zeros(n, dim - start);
        for (c, j) in (start..dim).enumerate() {
            for i in 0..n {
                rhs[(i, c)] = basis.mv[j][i];
            }
        }
        llt.solve_in_place(rhs.as_mut());

        let mut residual = DMatrix::<f64>::zeros(dim - start, dim - start);
        for (c, j) in (start..dim).enumerate() {
            let mut w: Vec<f64> = (0..n).map(|i| rhs[(i, c)]).collect();
            let scale = dot(&w, &w).sqrt();
            let (norm, mut mw) = orthogonalize(&mut w, &[&basis, &pending], &mut coef, m);
            for (r, &cv) in coef.iter().enumerate() {
                if r < dim {
                    h[r][j] = cv;
                } else {
                    residual[(r - dim, c)] = cv;
                }
            }
            if norm <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                // exhausted direction: restart it at random
                let (fw, fmw) = random_unit(&basis, &pending, &mut coef);
                w = fw;
                mw = fmw;
            } else {
                residual[(pending.len(), c)] = norm;
                w.iter_mut().for_each(|x| *x /= norm);
                mw.iter_mut().for_each(|x| *x /= norm);
            }
            pending.v.push(w);
            pending.mv.push(mw);
        }

        if dim < count + block {
            continue;
        }
        // the upper triangle is complete: column j holds every earlier row
        let hs = DMatrix::from_fn(dim, dim, |i, j| h[i.min(j)][i.max(j)]);
        let eig = SymmetricEigen::new(hs);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let converged = order.iter().take(count).all(|&idx| {
            let theta = eig.eigenvalues[idx];
            let tail = eig.eigenvectors.column(idx).rows(start, dim - start).into_owned();
            theta > 0.0 && (&residual * tail).norm() <= RESIDUAL_TOL * theta
        });
        if converged {
            let mut w: Vec<f64> = order.iter().take(count).map(|&i| (1.0 / eig.eigenvalues[i]).sqrt()).collect();
            w.sort_by(f64::total_cmp);
            return Ok(w);
        }
        if dim + block > max_dim {
            return Err(invalid(format!("Lanczos did not converge within {dim} vectors")));
        }
    }
}

/// Dense generalized eigenvalues via Cholesky of the mass; small problems only.
pub fn dense_frequencies(k: &DMatrix<f64>, m: &DMatrix<f64>, count: usize) -> Result<Vec<f64>> {
    let l = m.clone().cholesky().ok_or_else(|| invalid("mass is not positive definite"))?;
    let linv = l.l().try_inverse().ok_or_else(|| invalid("singular mass"))?;
    let c = &linv * k * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut lam: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    lam.sort_by(f64::total_cmp);
    Ok(lam.into_iter().take(count).map(|v| v.max(0.0).sqrt()).collect())
}
