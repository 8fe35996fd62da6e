#![no_main]

use libfuzzer_sys::fuzz_target;
use tomosim::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 14 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = ExperimentConfig::from_toml_str(text) {
        // validation must never panic, only judge
        let _ = config.validate();
    }
});
