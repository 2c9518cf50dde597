#![no_main]

use entdetect::io::{parse_state, state_to_json};

libfuzzer_sys::fuzz_target!(|data: &[u8]| {
    if let Ok(state) = parse_state(data) {
        let text = state_to_json(&state).unwrap();
        assert_eq!(parse_state(text.as_bytes()).unwrap(), state);
    }
});
