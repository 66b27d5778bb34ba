//! Fuzzes the trials.csv reader: arbitrary bytes must parse or error,
//! never panic, and any successfully parsed table must survive a
//! write-then-parse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;

use crosswalk::output::{parse_trials_csv, trials_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(outcomes) = parse_trials_csv(text) {
        let rendered = trials_csv_string(&outcomes);
        let reparsed = parse_trials_csv(&rendered).expect("round trip parses");
        assert_eq!(reparsed, outcomes);
    }
});
