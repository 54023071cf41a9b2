#![no_main]

use libfuzzer_sys::fuzz_target;
use tca::format::{parse_automaton, write_automaton};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_automaton(text) {
        let written = write_automaton(&m);
        let back = parse_automaton(&written).expect("written automaton parses");
        assert_eq!(write_automaton(&back), written);
    }
});
