#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec::io::{local_rule_from_json, local_rule_to_json, no_files};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rule) = local_rule_from_json(s, &no_files) {
        if let Ok(text) = local_rule_to_json(&rule) {
            local_rule_from_json(&text, &no_files).expect("own output parses");
        }
    }
});
