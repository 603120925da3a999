#![no_main]

use libfuzzer_sys::fuzz_target;
use octree_sbfem::io::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::from_json(text) else {
        return;
    };
    let json = serde_json::to_string(&cfg).expect("config serializes");
    assert_eq!(RunConfig::from_json(&json).expect("round trip"), cfg);
});
