#![no_main]

use hankel_sign::signdef::Classification;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = Classification::from_json(text) {
        let back = Classification::from_json(&c.to_json()).expect("emitted classification re-parses");
        assert_eq!(back, c);
    }
});
