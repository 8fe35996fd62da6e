#![no_main]

use libfuzzer_sys::fuzz_target;
use tomosim::harness::{csv_string, TrialRecord};

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    let mut reader = csv::Reader::from_reader(data);
    let mut rows = Vec::new();
    for row in reader.deserialize::<TrialRecord>() {
        match row {
            Ok(r) => rows.push(r),
            Err(_) => return,
        }
    }
    // finite rows that deserialize must serialize and read back unchanged
    if rows.iter().all(|r| {
        r.eps.is_finite() && r.trace_error.is_finite() && r.hs_error.is_finite()
    }) {
        let text = csv_string(&rows).expect("rows serialize");
        let mut again = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<TrialRecord> =
            again.deserialize().collect::<Result<_, _>>().expect("rewrite parses");
        assert_eq!(back, rows);
    }
});
