//! Pattern-grouped element-by-element solver tables, boundary conditions and
//! the serial transient driver.

pub mod bc;
pub mod tables;
pub mod transient;

pub use bc::{apply_bcs, fix_plane, surface_traction, BoundaryConditions, NeumannLoad, Plane};
pub use tables::{build_solver_tables, PatternGroup, SolverTables};
pub use transient::{
    advance, initial_state, probe_row, run_transient, Probe, ProbeHistory, Snapshot, StepContext, TransientOutput,
    TransientState,
};
