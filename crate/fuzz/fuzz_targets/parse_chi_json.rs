#![no_main]

use libfuzzer_sys::fuzz_target;
use weakrev::tomography::{process_fidelity, ChiMatrix};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(chi) = ChiMatrix::from_json_str(text) {
            let f = process_fidelity(&chi, &ChiMatrix::identity_channel());
            assert!(f.is_finite());
        }
    }
});
