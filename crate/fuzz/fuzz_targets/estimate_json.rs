#![no_main]

use genspec::estimate::Estimate;
use genspec::io::{from_json, to_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(est) = from_json::<Estimate>(text) {
        let back = to_json(&est).expect("serialize");
        let _: Estimate = from_json(&back).expect("reparse");
    }
});
