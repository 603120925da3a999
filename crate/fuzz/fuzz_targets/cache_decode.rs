#![no_main]

use libfuzzer_sys::fuzz_target;
use octree_sbfem::pattern::cache::{decode, encode};

fuzz_target!(|data: &[u8]| {
    let Ok(catalog) = decode(data) else {
        return;
    };
    let bytes = encode(&catalog);
    let again = decode(&bytes).expect("re-encoded catalog decodes");
    assert_eq!(encode(&again), bytes);
});
