#![no_main]

use libfuzzer_sys::fuzz_target;
use tomosim::pauli::{BasisSetting, OutcomeString, PauliString};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 10 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };

    if let Ok(p) = text.parse::<PauliString>() {
        assert_eq!(p.to_string(), text);
        assert!(p.weight() <= p.n_qubits());
    }
    if let Ok(b) = text.parse::<BasisSetting>() {
        assert_eq!(b.to_string(), text);
    }
    if let Ok(o) = text.parse::<OutcomeString>() {
        assert_eq!(o.to_string(), text);
        let back = OutcomeString::from_index(o.to_index(), o.n_qubits()).expect("index in range");
        assert_eq!(back, o);
    }
});
