#![no_main]

use std::sync::Arc;

use libfuzzer_sys::fuzz_target;
use tca::format::{guard_to_json, parse_guard};
use tca::zone::ClockSet;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let clocks = Arc::new(ClockSet::new(["x", "y"]).unwrap());
    if let Ok(g) = parse_guard(&clocks, text) {
        let back =
            parse_guard(&clocks, &guard_to_json(&g).to_string()).expect("written guard parses");
        assert!(back.equivalent(&g).unwrap());
        let _ = g.not().time_predecessor();
    }
});
