//! Scaled boundary finite element kernel for star-convex polyhedral cells.

pub mod coefficients;
pub mod matrices;
pub mod radial;
pub mod shape;

pub use coefficients::{cell_coefficients, CellCoefficients, CellGeometry};
pub use matrices::{
    build_element, consistent_mass, count_small_eigenvalues, element_max_frequency, lump_mass, relative_asymmetry,
    stiffness, ElementMatrices,
};
pub use radial::{radial_eigensolve, RadialSolution};
pub use shape::{quadrature, shape_eval, ShapeValues};
