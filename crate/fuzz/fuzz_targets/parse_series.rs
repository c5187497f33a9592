#![no_main]

use genspec::io::{format_series, parse_series};
use genspec::ValueKind;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for kind in [ValueKind::Real, ValueKind::Count] {
        if let Ok(series) = parse_series(text, kind) {
            // Whatever parses must survive a write and re-read unchanged.
            let again = parse_series(&format_series(&series), kind).expect("reparse");
            assert_eq!(again, series);
        }
    }
});
