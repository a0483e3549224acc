#![no_main]

use hankel_sign::GridFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = GridFunction::from_csv(text) {
        let back = GridFunction::from_csv(&g.to_csv()).expect("emitted grid re-parses");
        assert_eq!(back.values, g.values);
        assert_eq!(back.origin, g.origin);
    }
});
