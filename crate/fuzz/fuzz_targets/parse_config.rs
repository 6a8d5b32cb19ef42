#![no_main]

use libfuzzer_sys::fuzz_target;
use weakrev::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ExperimentConfig::from_json_str(text) {
            // Accepted configs must resolve without panicking.
            cfg.strengths().unwrap();
            cfg.resolved_states().unwrap();
        }
    }
});
