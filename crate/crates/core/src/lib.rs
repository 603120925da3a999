//! Explicit elasto-dynamics on balanced octree meshes with scaled boundary
//! polyhedral elements. Every cell is one of 144 master patterns, so element
//! matrices are built once per pattern and scaled by material and size.
//!
//! Pipeline: [`mesh`] builds and numbers the octree, [`pattern`] maps cells
//! to master cells, [`sbfem`] computes their matrices, [`assembly`] and
//! [`integrator`] run the central difference loop, and [`partition`] with
//! [`parallel`] distribute it over workers. [`run`] ties these together.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over parallel arrays read better than zipped iterators here.
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod error;
pub mod excitation;
pub mod integrator;
pub mod io;
pub mod material;
pub mod mesh;
pub mod numeric;
pub mod parallel;
pub mod partition;
pub mod pattern;
pub mod run;
pub mod sbfem;
pub mod topology;
pub mod verification;

pub use error::{Error, Result};
pub use material::{Material, MaterialTable};
