//! Spectral (Fiedler vector) and geometric (principal-axis median) bisection.

use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::graph::{components, DualGraph};

const FIEDLER_TOL: f64 = 1e-8;
const MAX_INVERSE_ITERS: usize = 200;

/// Induced subgraph in CSR form with local indices.
struct Local {
    offsets: Vec<usize>,
    cols: Vec<usize>,
}

impl Local {
    fn new(graph: &DualGraph, subset: &[u32]) -> Self {
        let index: HashMap<u32, usize> = subset.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut offsets = vec![0];
        let mut cols = Vec::new();
        for &v in subset {
            cols.extend(graph.adjacency[v as usize].iter().filter_map(|w| index.get(w).copied()));
            offsets.push(cols.len());
        }
        Self { offsets, cols }
    }

    fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    fn laplacian(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n() {
            let nb = &self.cols[self.offsets[i]..self.offsets[i + 1]];
            let mut s = nb.len() as f64 * x[i];
            for &j in nb {
                s -= x[j];
            }
            y[i] = s;
        }
    }

    fn max_degree(&self) -> usize {
        (0..self.n()).map(|i| self.offsets[i + 1] - self.offsets[i]).max().unwrap_or(0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn deflate(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Conjugate gradients for `L x = b` on the complement of the constant vector.
fn cg(g: &Local, b: &[f64], x: &mut [f64], tol: f64) {
    let n = g.n();
    x.iter_mut().for_each(|v| *v = 0.0);
    let mut r = b.to_vec();
    deflate(&mut r);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let stop = tol * tol * rr;
    for _ in 0..(4 * n + 100) {
        if rr <= stop || rr == 0.0 {
            break;
        }
        g.laplacian(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    deflate(x);
}

/// Fiedler vector of a connected induced subgraph by inverse iteration.
fn fiedler(graph: &DualGraph, subset: &[u32]) -> Vec<f64> {
    let g = Local::new(graph, subset);
    let n = g.n();
    if n <= 2 {
        return (0..n).map(|i| i as f64).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut x);
    normalize(&mut x);
    let scale = 2.0 * g.max_degree() as f64;
    let mut y = vec![0.0; n];
    let mut lx = vec![0.0; n];
    for _ in 0..MAX_INVERSE_ITERS {
        cg(&g, &x, &mut y, 1e-10);
        if normalize(&mut y) == 0.0 {
            break;
        }
        std::mem::swap(&mut x, &mut y);
        g.laplacian(&x, &mut lx);
        let lambda = dot(&x, &lx);
        let res = lx.iter().zip(&x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        if res <= FIEDLER_TOL * scale {
            break;
        }
    }
    x
}

/// Orders `subset` so that its first half and second half form the two parts.
fn split_sorted(subset: &[u32], keys: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let mut idx: Vec<usize> = (0..subset.len()).collect();
    idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(subset[a].cmp(&subset[b])));
    let half = subset.len() / 2;
    let mut left: Vec<u32> = idx[..half].iter().map(|&i| subset[i]).collect();
    let mut right: Vec<u32> = idx[half..].iter().map(|&i| subset[i]).collect();
    left.sort_unstable();
    right.sort_unstable();
    (left, right)
}

/// Median split of the Fiedler ordering. Disconnected subsets are handled by
/// concatenating per-component orderings (components by smallest vertex).
pub fn spectral_bisect(graph: &DualGraph, subset: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let comps = components(graph, subset);
    let mut keys = vec![0.0; subset.len()];
    let mut base = 0.0;
    for comp in &comps {
        let verts: Vec<u32> = comp.iter().map(|&i| subset[i as usize]).collect();
        let mut f = fiedler(graph, &verts);
        // fix the sign so the lowest-id vertex sits on the low side
        if f.first().is_some_and(|&v| v > 0.0) {
            f.iter_mut().for_each(|v| *v = -*v);
        }
        let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let span = (hi - lo).max(f64::MIN_POSITIVE);
        for (k, &i) in comp.iter().enumerate() {
            keys[i as usize] = base + (f[k] - lo) / span;
        }
        base += 2.0;
    }
    split_sorted(subset, &keys)
}

/// Median split along the principal axis of the centroids. A degenerate
/// leading eigenvalue falls back to the coordinate axis of largest variance.
pub fn geometric_bisect(graph: &DualGraph, subset: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let n = subset.len().max(1) as f64;
    let mut mean = [0.0; 3];
    for &v in subset {
        for d in 0..3 {
            mean[d] += graph.centroids[v as usize][d] / n;
        }
    }
    let mut cov = Matrix3::<f64>::zeros();
    for &v in subset {
        let c = graph.centroids[v as usize];
        for a in 0..3 {
            for b in 0..3 {
                cov[(a, b)] += (c[a] - mean[a]) * (c[b] - mean[b]) / n;
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let ev: [f64; 3] = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| ev[b].total_cmp(&ev[a]));
    let top = ev[order[0]];
    let axis: [f64; 3] = if top - ev[order[1]] > 1e-9 * top.abs().max(f64::MIN_POSITIVE) {
        let v = eig.eigenvectors.column(order[0]);
        [v[0], v[1], v[2]]
    } else {
        let mut best = 0;
        for d in 1..3 {
            if cov[(d, d)] > cov[(best, best)] * (1.0 + 1e-9) {
                best = d;
            }
        }
        let mut e = [0.0; 3];
        e[best] = 1.0;
        e
    };
    let keys: Vec<f64> = subset
        .iter()
        .map(|&v| {
            let c = graph.centroids[v as usize];
            (0..3).map(|d| (c[d] - mean[d]) * axis[d]).sum()
        })
        .collect();
    split_sorted(subset, &keys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> DualGraph {
        let adjacency = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i as u32 - 1);
                }
                if i + 1 < n {
                    v.push(i as u32 + 1);
                }
                v
            })
            .collect();
        DualGraph { adjacency, centroids: (0..n).map(|i| [i as f64, 0.0, 0.0]).collect() }
    }

    #[test]
    fn path_of_four_splits_in_the_middle() {
        let g = path(4);
        let all: Vec<u32> = (0..4).collect();
        let (a, b) = spectral_bisect(&g, &all);
        assert_eq!(a, vec![0, 1]);
        assert_eq!(b, vec![2, 3]);
        let (a, b) = geometric_bisect(&g, &all);
        assert_eq!((a, b), (vec![0, 1], vec![2, 3]));
    }

    #[test]
    fn long_path_is_cut_once() {
        let g = path(101);
        let all: Vec<u32> = (0..101).collect();
        let (a, b) = spectral_bisect(&g, &all);
        assert_eq!(a.len(), 50);
        assert_eq!(b.len(), 51);
        let cut = a.iter().filter(|&&v| g.adjacency[v as usize].iter().any(|w| b.binary_search(w).is_ok())).count();
        assert_eq!(cut, 1);
    }

    #[test]
    fn pair_splits_one_one() {
        let g = path(2);
        let (a, b) = spectral_bisect(&g, &[0, 1]);
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn disconnected_components_are_balanced() {
        // two paths of 3 and 5 vertices
        let mut g = path(8);
        g.adjacency[2].retain(|&w| w != 3);
        g.adjacency[3].retain(|&w| w != 2);
        let all: Vec<u32> = (0..8).collect();
        let (a, b) = spectral_bisect(&g, &all);
        assert_eq!((a.len(), b.len()), (4, 4));
        assert!(a.contains(&0) && a.contains(&1) && a.contains(&2));
    }

    #[test]
    fn geometric_sizes_differ_by_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [5usize, 17, 64, 99] {
            let centroids = (0..n).map(|_| [rng.gen::<f64>(), 3.0 * rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let g = DualGraph { adjacency: vec![Vec::new(); n], centroids };
            let all: Vec<u32> = (0..n as u32).collect();
            let (a, b) = geometric_bisect(&g, &all);
            assert!(b.len() - a.len() <= 1);
            assert_eq!(a.len() + b.len(), n);
        }
    }
}
