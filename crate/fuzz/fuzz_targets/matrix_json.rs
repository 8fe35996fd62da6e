#![no_main]

use libfuzzer_sys::fuzz_target;
use tomosim::linalg::{matrix_from_json, matrix_to_json};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = matrix_from_json(text) {
        // anything accepted must survive a write/read cycle bit-exact
        let back = matrix_from_json(&matrix_to_json(&m)).expect("rewrite parses");
        assert_eq!(back.dim(), m.dim());
        for i in 0..m.dim() {
            for j in 0..m.dim() {
                assert_eq!(m[(i, j)], back[(i, j)]);
            }
        }
    }
});
