//! Boundary integrals E0, E1, E2 and M0 of a polyhedral cell.

use nalgebra::{DMatrix, Matrix3, SMatrix, Vector3};

use super::shape::{quadrature, shape_eval};
use crate::error::{Error, Result};
use crate::material::Matrix6;
use crate::mesh::face::{cell_surface, SurfaceKind};
use crate::topology::{present_slots, SLOTS};

type Matrix6x3 = SMatrix<f64, 6, 3>;

/// Boundary of a star-convex cell: node coordinates relative to the scaling
/// center and surface elements referencing them.
#[derive(Debug, Clone)]
pub struct CellGeometry {
    pub nodes: Vec<Vector3<f64>>,
    pub surfaces: Vec<(SurfaceKind, Vec<usize>)>,
}

impl CellGeometry {
    /// Cube of edge `size` centered at the origin, nodes in master order.
    pub fn cube(mask: u16, size: f64) -> Self {
        let slots = present_slots(mask);
        let local = |s: usize| slots.iter().position(|&x| x == s).expect("present slot");
        let nodes = slots.iter().map(|&s| SLOTS[s].map(|h| (h as f64 - 1.0) * 0.5 * size).into()).collect();
        let surfaces = cell_surface(mask).into_iter().map(|(k, ss)| (k, ss.into_iter().map(local).collect())).collect();
        Self { nodes, surfaces }
    }

    pub fn n_dof(&self) -> usize {
        3 * self.nodes.len()
    }
}

#[derive(Debug, Clone)]
pub struct CellCoefficients {
    pub e0: DMatrix<f64>,
    pub e1: DMatrix<f64>,
    pub e2: DMatrix<f64>,
    pub m0: DMatrix<f64>,
}

impl CellCoefficients {
    pub fn n_dof(&self) -> usize {
        self.e0.nrows()
    }
}

/// Strain-operator block `b(g) = gx L1 + gy L2 + gz L3` (Voigt `xx yy zz yz xz xy`).
fn b_of(g: &Vector3<f64>) -> Matrix6x3 {
    let mut b = Matrix6x3::zeros();
    b[(0, 0)] = g.x;
    b[(4, 2)] = g.x;
    b[(5, 1)] = g.x;
    b[(1, 1)] = g.y;
    b[(3, 2)] = g.y;
    b[(5, 0)] = g.y;
    b[(2, 2)] = g.z;
    b[(3, 1)] = g.z;
    b[(4, 0)] = g.z;
    b
}

/// Strain operators of one surface element at a point.
#[derive(Debug, Clone)]
pub struct PointOperators {
    pub n: Vec<f64>,
    pub b1: DMatrix<f64>,
    pub b2: DMatrix<f64>,
    pub det_j: f64,
}

pub fn point_operators(geom: &CellGeometry, element: usize, eta: f64, zeta: f64) -> Result<PointOperators> {
    let (kind, ref ids) = geom.surfaces[element];
    let sv = shape_eval(kind, eta, zeta)?;
    let mut x = Vector3::zeros();
    let mut xe = Vector3::zeros();
    let mut xz = Vector3::zeros();
    for (k, &id) in ids.iter().enumerate() {
        x += geom.nodes[id] * sv.n[k];
        xe += geom.nodes[id] * sv.dn_eta[k];
        xz += geom.nodes[id] * sv.dn_zeta[k];
    }
    let j = Matrix3::from_rows(&[x.transpose(), xe.transpose(), xz.transpose()]);
    let det_j = j.determinant();
    if !(det_j > 0.0) {
        return Err(Error::BadJacobian { cell: usize::MAX, element, det: det_j });
    }
    let jinv = j.try_inverse().expect("nonsingular Jacobian");
    let b1 = b_of(&jinv.column(0).into_owned());
    let b2 = b_of(&jinv.column(1).into_owned());
    let b3 = b_of(&jinv.column(2).into_owned());
    let m = ids.len();
    let mut big1 = DMatrix::zeros(6, 3 * m);
    let mut big2 = DMatrix::zeros(6, 3 * m);
    for k in 0..m {
        big1.view_mut((0, 3 * k), (6, 3)).copy_from(&(b1 * sv.n[k]));
        big2.view_mut((0, 3 * k), (6, 3)).copy_from(&(b2 * sv.dn_eta[k] + b3 * sv.dn_zeta[k]));
    }
    Ok(PointOperators { n: sv.n, b1: big1, b2: big2, det_j })
}

pub fn cell_coefficients(geom: &CellGeometry, d: &Matrix6, rho: f64) -> Result<CellCoefficients> {
    let n = geom.n_dof();
    let mut e0 = DMatrix::zeros(n, n);
    let mut e1 = DMatrix::zeros(n, n);
    let mut e2 = DMatrix::zeros(n, n);
    let mut m0 = DMatrix::zeros(n, n);
    let dd = DMatrix::from_column_slice(6, 6, d.as_slice());
    for (el, (kind, ids)) in geom.surfaces.iter().enumerate() {
        let m = ids.len();
        let mut le0 = DMatrix::zeros(3 * m, 3 * m);
        let mut le1 = DMatrix::zeros(3 * m, 3 * m);
        let mut le2 = DMatrix::zeros(3 * m, 3 * m);
        let mut lm0 = DMatrix::<f64>::zeros(3 * m, 3 * m);
        for (eta, zeta, w) in quadrature(*kind) {
            let op = point_operators(geom, el, eta, zeta)?;
            let f = w * op.det_j;
            let db1 = &dd * &op.b1;
            let db2 = &dd * &op.b2;
            le0 += op.b1.transpose() * &db1 * f;
            le1 += op.b2.transpose() * &db1 * f;
            le2 += op.b2.transpose() * &db2 * f;
            for a in 0..m {
                for b in 0..m {
                    let v = rho * op.n[a] * op.n[b] * f;
                    for c in 0..3 {
                        lm0[(3 * a + c, 3 * b + c)] += v;
                    }
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for r in 0..3 {
                    for c in 0..3 {
                        let (gi, gj) = (3 * ids[a] + r, 3 * ids[b] + c);
                        let (li, lj) = (3 * a + r, 3 * b + c);
                        e0[(gi, gj)] += le0[(li, lj)];
                        e1[(gi, gj)] += le1[(li, lj)];
                        e2[(gi, gj)] += le2[(li, lj)];
                        m0[(gi, gj)] += lm0[(li, lj)];
                    }
                }
            }
        }
    }
    Ok(CellCoefficients { e0, e1, e2, m0 })
}
