//! Surface shape functions and quadrature rules.

use crate::error::{invalid, Result};
use crate::mesh::face::SurfaceKind;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeValues {
    pub n: Vec<f64>,
    pub dn_eta: Vec<f64>,
    pub dn_zeta: Vec<f64>,
}

const QUAD_SIGNS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

/// Triangles use `(1-η-ζ, η, ζ)` on the unit simplex; quads the bilinear
/// functions on `[-1, 1]^2` with nodes counter-clockwise from `(-1,-1)`.
pub fn shape_eval(kind: SurfaceKind, eta: f64, zeta: f64) -> Result<ShapeValues> {
    const TOL: f64 = 1e-12;
    match kind {
        SurfaceKind::Tri3 => {
            if eta < -TOL || zeta < -TOL || eta + zeta > 1.0 + TOL {
                return Err(invalid(format!("({eta}, {zeta}) outside reference triangle")));
            }
            Ok(ShapeValues {
                n: vec![1.0 - eta - zeta, eta, zeta],
                dn_eta: vec![-1.0, 1.0, 0.0],
                dn_zeta: vec![-1.0, 0.0, 1.0],
            })
        }
        SurfaceKind::Quad4 => {
            if eta.abs() > 1.0 + TOL || zeta.abs() > 1.0 + TOL {
                return Err(invalid(format!("({eta}, {zeta}) outside reference quad")));
            }
            let mut s = ShapeValues { n: vec![0.0; 4], dn_eta: vec![0.0; 4], dn_zeta: vec![0.0; 4] };
            for (i, &(a, b)) in QUAD_SIGNS.iter().enumerate() {
                s.n[i] = 0.25 * (1.0 + a * eta) * (1.0 + b * zeta);
                s.dn_eta[i] = 0.25 * a * (1.0 + b * zeta);
                s.dn_zeta[i] = 0.25 * b * (1.0 + a * eta);
            }
            Ok(s)
        }
    }
}

/// `(η, ζ, weight)` triples. Triangles: symmetric 3-point rule, exact to
/// degree 2. Quads: 3×3 Gauss, exact to degree 5 per direction.
pub fn quadrature(kind: SurfaceKind) -> Vec<(f64, f64, f64)> {
    match kind {
        SurfaceKind::Tri3 => {
            let w = 1.0 / 6.0;
            vec![(1.0 / 6.0, 1.0 / 6.0, w), (2.0 / 3.0, 1.0 / 6.0, w), (1.0 / 6.0, 2.0 / 3.0, w)]
        }
        SurfaceKind::Quad4 => {
            let g = (0.6f64).sqrt();
            let pts = [(-g, 5.0 / 9.0), (0.0, 8.0 / 9.0), (g, 5.0 / 9.0)];
            let mut out = Vec::with_capacity(9);
            for &(b, wb) in &pts {
                for &(a, wa) in &pts {
                    out.push((a, b, wa * wb));
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn quad_center_and_triangle_vertices() {
        let s = shape_eval(SurfaceKind::Quad4, 0.0, 0.0).unwrap();
        assert_eq!(s.n, vec![0.25; 4]);
        let s = shape_eval(SurfaceKind::Tri3, 1.0, 0.0).unwrap();
        assert_eq!(s.n, vec![0.0, 1.0, 0.0]);
        let s = shape_eval(SurfaceKind::Tri3, 0.0, 1.0).unwrap();
        assert_eq!(s.n, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(shape_eval(SurfaceKind::Quad4, 1.5, 0.0).is_err());
        assert!(shape_eval(SurfaceKind::Tri3, 0.7, 0.7).is_err());
    }

    #[test]
    fn partition_of_unity_at_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (a, b): (f64, f64) = (rng.gen(), rng.gen());
            let s = shape_eval(SurfaceKind::Tri3, a * (1.0 - b), b).unwrap();
            let q = shape_eval(SurfaceKind::Quad4, 2.0 * a - 1.0, 2.0 * b - 1.0).unwrap();
            for v in [&s, &q] {
                assert!((v.n.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                assert!(v.dn_eta.iter().sum::<f64>().abs() < 1e-14);
                assert!(v.dn_zeta.iter().sum::<f64>().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rules_integrate_their_degree_exactly() {
        let tri: f64 = quadrature(SurfaceKind::Tri3).iter().map(|&(e, z, w)| w * e * z).sum();
        assert!((tri - 1.0 / 24.0).abs() < 1e-15);
        let quad: f64 = quadrature(SurfaceKind::Quad4).iter().map(|&(e, z, w)| w * e.powi(4) * z.powi(4)).sum();
        assert!((quad - 4.0 / 25.0).abs() < 1e-14);
    }
}
