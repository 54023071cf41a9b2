#![no_main]

use libfuzzer_sys::fuzz_target;
use tca::format::{parse_trace, write_trace};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ts) = parse_trace(text) {
        assert_eq!(
            parse_trace(&write_trace(&ts)).expect("written trace parses"),
            ts
        );
    }
});
