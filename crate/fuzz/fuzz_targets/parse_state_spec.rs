#![no_main]

use entdetect::experiments::StateSpec;

// File specs would touch the filesystem; only named constructors are built.
libfuzzer_sys::fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = s.parse::<StateSpec>() {
        if !matches!(spec, StateSpec::File(_)) {
            let _ = spec.build();
        }
    }
});
