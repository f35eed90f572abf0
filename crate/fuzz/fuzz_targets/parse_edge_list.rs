#![no_main]

use libfuzzer_sys::fuzz_target;
use nullmodels::io::{parse_edge_list, write_edge_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(el) = parse_edge_list(text) {
        el.graph.validate().expect("parsed graph is consistent");
        let again = parse_edge_list(&write_edge_list(&el.graph, &Default::default())).expect("written list parses");
        assert_eq!(again.graph, el.graph);
    }
});
