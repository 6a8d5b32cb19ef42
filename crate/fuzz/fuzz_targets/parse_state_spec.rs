#![no_main]

use libfuzzer_sys::fuzz_target;
use weakrev::harness::StateSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = text.parse::<StateSpec>() {
            let psi = spec.resolve().unwrap();
            let n = psi.alpha().norm_sqr() + psi.beta().norm_sqr();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
});
