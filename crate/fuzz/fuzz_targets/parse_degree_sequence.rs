#![no_main]

use libfuzzer_sys::fuzz_target;
use nullmodels::degree_model::DegreeSequence;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(seq) = DegreeSequence::parse(text) {
        assert!(seq.values().iter().all(|&d| d > 0));
        assert_eq!(DegreeSequence::parse(&seq.to_text()).expect("written sequence parses"), seq);
    }
});
