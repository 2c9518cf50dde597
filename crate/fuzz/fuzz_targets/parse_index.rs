#![no_main]

use entdetect::CorrelationIndex;

libfuzzer_sys::fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(idx) = s.parse::<CorrelationIndex>() {
        assert_eq!(idx.to_string().parse::<CorrelationIndex>().unwrap(), idx);
        assert_eq!(idx.n_parties(), idx.labels().len());
    }
});
