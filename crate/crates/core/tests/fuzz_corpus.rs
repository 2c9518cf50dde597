//! Replays the checked-in fuzz corpus through the same assertions as the
//! fuzz targets.

use std::fs;
use std::path::PathBuf;

use entdetect::experiments::StateSpec;
use entdetect::io::{parse_state, parse_tree, state_to_json};
use entdetect::tree::check_invariants;
use entdetect::{CorrelationIndex, Mode};

fn corpus(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let path = e.unwrap().path();
            let bytes = fs::read(&path).unwrap();
            (path, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus {target}");
    out
}

#[test]
fn state_files() {
    let mut accepted = 0;
    for (path, data) in corpus("parse_state_file") {
        if let Ok(state) = parse_state(&data) {
            let text = state_to_json(&state).unwrap();
            assert_eq!(parse_state(text.as_bytes()).unwrap(), state, "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 4);
}

#[test]
fn tree_files() {
    let mut accepted = 0;
    for (path, data) in corpus("parse_tree_file") {
        if let Ok(tree) = parse_tree(&data) {
            check_invariants(tree.root()).unwrap();
            assert_eq!(parse_tree(tree.to_json().unwrap().as_bytes()).unwrap(), tree, "{}", path.display());
            accepted += 1;
        }
    }
    assert!(accepted >= 3);
}

#[test]
fn state_specs() {
    for (_, data) in corpus("parse_state_spec") {
        let Ok(s) = std::str::from_utf8(&data) else { continue };
        if let Ok(spec) = s.parse::<StateSpec>() {
            if !matches!(spec, StateSpec::File(_)) {
                let _ = spec.build();
            }
        }
    }
}

#[test]
fn indices() {
    for (_, data) in corpus("parse_index") {
        let Ok(s) = std::str::from_utf8(&data) else { continue };
        if let Ok(idx) = s.parse::<CorrelationIndex>() {
            assert_eq!(idx.to_string().parse::<CorrelationIndex>().unwrap(), idx);
            assert_eq!(idx.n_parties(), idx.labels().len());
        }
    }
}

#[test]
fn modes() {
    for (_, data) in corpus("parse_mode") {
        let Ok(s) = std::str::from_utf8(&data) else { continue };
        if let Ok(mode) = s.parse::<Mode>() {
            assert_eq!(mode.to_string().parse::<Mode>().unwrap(), mode);
        }
    }
}
