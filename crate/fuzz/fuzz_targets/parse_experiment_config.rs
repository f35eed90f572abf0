#![no_main]

use libfuzzer_sys::fuzz_target;
use nullmodels::experiments::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json_str(text) {
        // hashing is total on accepted configs
        assert_eq!(cfg.hash().len(), 64);
    }
});
