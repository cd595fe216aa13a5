#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec::io::{triangulation_from_json, triangulation_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = triangulation_from_json(s) {
        let text = triangulation_to_json(&t);
        let back = triangulation_from_json(&text).expect("own output parses");
        assert_eq!(triangulation_to_json(&back), text);
    }
});
