#![no_main]

use genspec::models::Family;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(family) = s.parse::<Family>() {
        let name = family.to_string();
        assert_eq!(name.parse::<Family>().unwrap(), family);
    }
});
