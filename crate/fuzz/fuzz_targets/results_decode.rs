#![no_main]

use libfuzzer_sys::fuzz_target;
use octree_sbfem::io::{decode_results, encode_results};

fuzz_target!(|data: &[u8]| {
    let Ok(results) = decode_results(data) else {
        return;
    };
    let bytes = encode_results(&results);
    let again = decode_results(&bytes).expect("re-encoded results decode");
    assert_eq!(encode_results(&again), bytes);
});
