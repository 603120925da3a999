//! Analytic references, verification meshes and the small-scale eigen
//! solver used to check the explicit solver.

pub mod beam;
pub mod cases;
pub mod cube;
pub mod meshes;
pub mod modal;
pub mod sparse;
pub mod study;
pub mod suites;

pub use beam::{history_error, rod_modal_displacement, rod_response, RodSpec};
pub use cases::{beam_case, beam_errors, beam_study, demo_case, BeamStudyRow};
pub use cube::{cube_eigenfrequencies, modal_error, CubeReference, CubeSpec};
pub use meshes::{beam_mesh, cube_mesh, three_material_demo, CubeMeshType};
pub use modal::{dense_frequencies, lowest_frequencies, MassOperator};
pub use study::{cube_modal, cube_study, roller_dofs, CubeStudyRow, ModalResult};
