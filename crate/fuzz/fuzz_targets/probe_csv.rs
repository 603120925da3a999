#![no_main]

use libfuzzer_sys::fuzz_target;
use octree_sbfem::io::{parse_probe_csv, probe_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_probe_csv(text) else {
        return;
    };
    let again = parse_probe_csv(&probe_csv(&rows)).expect("written CSV parses");
    let bits = |r: &[[f64; 7]]| r.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&rows), bits(&again));
});
