#![no_main]

use libfuzzer_sys::fuzz_target;
use weakrev::tomography::{read_counts_csv, write_counts_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = read_counts_csv(data) {
        let mut buf = Vec::new();
        write_counts_csv(&records, &mut buf).unwrap();
        assert_eq!(read_counts_csv(buf.as_slice()).unwrap(), records);
    }
});
