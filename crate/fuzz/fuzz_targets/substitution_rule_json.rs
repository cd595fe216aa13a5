#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec::generate::substitution_validate;
use trispec::io::{no_files, rule_from_json, rule_to_json};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rule) = rule_from_json(s, &no_files) {
        // small rules only; validation substitutes several rounds
        if rule.images.iter().all(|i| i.patch.num_faces() <= 8) {
            let _ = substitution_validate(&rule);
        }
        rule_from_json(&rule_to_json(&rule), &no_files).expect("own output parses");
    }
});
