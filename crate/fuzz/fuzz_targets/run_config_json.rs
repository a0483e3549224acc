//! Run configs: parsing and validation never panic; valid configs round-trip.

#![no_main]

use hankel_sign::run::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(config) = RunConfig::from_json(text) else { return };
    if config.validate().is_ok() {
        let back = RunConfig::from_json(&config.to_json()).expect("emitted config re-parses");
        assert_eq!(back, config);
        assert!(back.validate().is_ok());
    }
});
