#![no_main]

use libfuzzer_sys::fuzz_target;
use octree_sbfem::io::{decode_mesh, encode_mesh};

fuzz_target!(|data: &[u8]| {
    let Ok(mesh) = decode_mesh(data) else {
        return;
    };
    let again = decode_mesh(&encode_mesh(&mesh)).expect("re-encoded mesh decodes");
    assert_eq!(mesh.leaves(), again.leaves());
});
