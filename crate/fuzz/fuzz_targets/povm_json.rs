#![no_main]

use libfuzzer_sys::fuzz_target;
use tomosim::measurement::{mic_trace_norm, povm_from_json, povm_to_json};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(povm) = povm_from_json(text) {
        // accepted POVMs re-serialize cleanly and have a finite channel norm
        let again = povm_from_json(&povm_to_json(&povm)).expect("rewrite parses");
        assert_eq!(again.dim(), povm.dim());
        assert_eq!(again.n_outcomes(), povm.n_outcomes());
        assert!(mic_trace_norm(&povm).is_finite());
    }
});
