#![no_main]

use genspec::io::parse_f64_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(values) = parse_f64_list(s) {
            assert!(values.iter().all(|v| v.is_finite()));
            assert_eq!(values.len(), s.split(',').count());
        }
    }
});
