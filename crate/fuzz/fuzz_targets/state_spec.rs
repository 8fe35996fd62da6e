#![no_main]

use libfuzzer_sys::fuzz_target;
use tomosim::harness::StateSpec;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 10 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<StateSpec>() {
        // display form must parse back to the same spec
        let again: StateSpec = spec.to_string().parse().expect("display form parses");
        assert_eq!(again, spec);
    }
});
