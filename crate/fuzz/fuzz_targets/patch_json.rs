#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec::io::{patch_from_json, patch_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = patch_from_json(s) {
        let text = patch_to_json(&p);
        let back = patch_from_json(&text).expect("own output parses");
        assert_eq!(patch_to_json(&back), text);
    }
});
