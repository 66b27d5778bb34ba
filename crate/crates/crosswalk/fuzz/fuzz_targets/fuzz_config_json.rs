//! Fuzzes the scenario-config JSON parser and validator: arbitrary bytes
//! must either parse into a config (which then either validates or reports
//! violations) or return an error — never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

use crosswalk::config::{validate_config, ScenarioConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ScenarioConfig::from_json_str(text) {
        let _ = validate_config(cfg);
    }
});
