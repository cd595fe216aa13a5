#![no_main]

use libfuzzer_sys::fuzz_target;
use trispec_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(s) {
        let _ = cfg.stage_list();
    }
});
