#![no_main]

use entdetect::Mode;

libfuzzer_sys::fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(mode) = s.parse::<Mode>() {
        assert_eq!(mode.to_string().parse::<Mode>().unwrap(), mode);
    }
});
