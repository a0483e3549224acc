//! Kernel specs: parsing never panics, and whatever parses survives a round trip.

#![no_main]

use hankel_sign::KernelSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = KernelSpec::from_json(text) {
        let back = KernelSpec::from_json(&spec.to_json()).expect("emitted spec re-parses");
        assert_eq!(back, spec);
        let _ = spec.label();
    }
});
