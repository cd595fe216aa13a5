#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec::spectral::TestFunction;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = s.parse::<TestFunction>() {
        let _ = f.eval(0.0);
        let back: TestFunction = f.to_string().parse().expect("display parses");
        assert_eq!(back, f);
    }
});
