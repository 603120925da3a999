#![no_main]

use libfuzzer_sys::fuzz_target;
use octree_sbfem::io::{parse_vtk, write_vtk};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(grid) = parse_vtk(text) else {
        return;
    };
    let written = write_vtk(&grid);
    let again = parse_vtk(&written).expect("written VTK parses");
    assert_eq!(write_vtk(&again), written);
});
