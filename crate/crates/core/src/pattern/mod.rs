//! Cell transforms, pattern canonicalization and the master-cell catalog.

pub mod cache;
pub mod canonical;
pub mod catalog;
pub mod dofmap;
pub mod transform;

pub use canonical::{canonical_mask, canonicalize};
pub use catalog::{build_master_cell, mesh_keys, MasterCell, PatternCatalog};
pub use dofmap::{element_dof_map, ElementDofMap};
pub use transform::{transforms48, CellTransform};
