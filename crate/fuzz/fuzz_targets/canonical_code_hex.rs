#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec::morph::CanonicalCode;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Some(code) = CanonicalCode::from_hex(s) {
        assert_eq!(CanonicalCode::from_hex(&code.to_hex()), Some(code));
    }
});
