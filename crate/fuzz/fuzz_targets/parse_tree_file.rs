#![no_main]

use entdetect::io::parse_tree;
use entdetect::tree::check_invariants;

libfuzzer_sys::fuzz_target!(|data: &[u8]| {
    if let Ok(tree) = parse_tree(data) {
        check_invariants(tree.root()).unwrap();
        let text = tree.to_json().unwrap();
        assert_eq!(parse_tree(text.as_bytes()).unwrap(), tree);
    }
});
