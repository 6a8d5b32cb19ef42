#![no_main]

use libfuzzer_sys::fuzz_target;
use weakrev::qubit::DensityMatrix;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rho) = DensityMatrix::from_json_str(text) {
            let [lo, _] = rho.eigenvalues();
            assert!(lo >= -1e-9);
            let again = serde_json::to_string(&rho).unwrap();
            DensityMatrix::from_json_str(&again).unwrap();
        }
    }
});
