//! JSON file formats for states and trees.
//!
//! State files hold either a density matrix or a pure state:
//!
//! ```json
//! {"n_qubits": 1, "matrix": [[[0.5, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.5, 0.0]]]}
//! {"n_qubits": 1, "amplitudes": [[0.7071067811865476, 0.0], [0.7071067811865476, 0.0]]}
//! ```
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{DensityMatrix, PureState};
use crate::tolerance::MAX_QUBITS;
use crate::tree::DecisionTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<[f64; 2]>>,
}

/// Contents of a state file.
#[derive(Debug, Clone, PartialEq)]
pub enum StateData {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateData {
    pub fn n_qubits(&self) -> usize {
        match self {
            StateData::Pure(p) => p.n_qubits(),
            StateData::Mixed(m) => m.n_qubits(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            StateData::Pure(p) => p.density(),
            StateData::Mixed(m) => m.clone(),
        }
    }
}

fn pair(z: &C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: &[f64; 2]) -> Result<C64> {
    if !p.iter().all(|x| x.is_finite()) {
        return Err(Error::Parse("non-finite number in state file".into()));
    }
    Ok(C64::new(p[0], p[1]))
}

pub fn state_to_json(state: &StateData) -> Result<String> {
    let file = match state {
        StateData::Pure(p) => StateFile {
            n_qubits: p.n_qubits(),
            matrix: None,
            amplitudes: Some(p.amplitudes().iter().map(pair).collect()),
        },
        StateData::Mixed(m) => {
            let mat = m.matrix();
            StateFile {
                n_qubits: m.n_qubits(),
                matrix: Some((0..mat.rows()).map(|i| mat.row(i).iter().map(pair).collect()).collect()),
                amplitudes: None,
            }
        }
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Parses and validates a state file.
pub fn parse_state(bytes: &[u8]) -> Result<StateData> {
    let file: StateFile = serde_json::from_slice(bytes)?;
    let n = file.n_qubits;
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::UnsupportedDimension(n));
    }
    let dim = 1usize << n;
    let data = match (file.matrix, file.amplitudes) {
        (Some(rows), None) => {
            if rows.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rows.len(),
                });
            }
            let mut entries = Vec::with_capacity(dim * dim);
            for row in &rows {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: row.len(),
                    });
                }
                for p in row {
                    entries.push(complex(p)?);
                }
            }
            StateData::Mixed(DensityMatrix::new(ComplexMatrix::from_vec(dim, dim, entries)?)?)
        }
        (None, Some(amps)) => {
            if amps.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: amps.len(),
                });
            }
            let amps = amps.iter().map(complex).collect::<Result<Vec<_>>>()?;
            StateData::Pure(PureState::new(amps)?)
        }
        _ => {
            return Err(Error::Parse(
                "state file needs exactly one of \"matrix\" or \"amplitudes\"".into(),
            ))
        }
    };
    Ok(data)
}

/// Parses and validates a tree file.
pub fn parse_tree(bytes: &[u8]) -> Result<DecisionTree> {
    Ok(serde_json::from_slice(bytes)?)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `contents` to `path`, reporting the path on failure.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::Parse(format!("{}: {other}", path.display())),
    })
}

pub fn load_state(path: &Path) -> Result<StateData> {
    let bytes = read(path)?;
    with_path(path, parse_state(&bytes))
}

pub fn save_state(path: &Path, state: &StateData) -> Result<()> {
    write_file(path, &state_to_json(state)?)
}

pub fn load_tree(path: &Path) -> Result<DecisionTree> {
    let bytes = read(path)?;
    with_path(path, parse_tree(&bytes))
}

pub fn save_tree(path: &Path, tree: &DecisionTree) -> Result<()> {
    write_file(path, &tree.to_json()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_werner, phi_plus};
    use crate::tree::default_tree_2q;

    #[test]
    fn state_round_trip() {
        let pure = StateData::Pure(phi_plus());
        let s = state_to_json(&pure).unwrap();
        assert_eq!(parse_state(s.as_bytes()).unwrap(), pure);
        let mixed = StateData::Mixed(make_werner(0.3).unwrap());
        let s = state_to_json(&mixed).unwrap();
        assert_eq!(parse_state(s.as_bytes()).unwrap(), mixed);
    }

    #[test]
    fn state_parse_errors() {
        for bad in [
            "",
            "{}",
            r#"{"n_qubits":1}"#,
            r#"{"n_qubits":1,"amplitudes":[[1,0]]}"#,
            r#"{"n_qubits":1,"amplitudes":[[1,0],[1,0]]}"#,
            r#"{"n_qubits":0,"amplitudes":[]}"#,
            r#"{"n_qubits":5,"amplitudes":[]}"#,
            r#"{"n_qubits":1,"matrix":[[[1,0],[0,0]],[[0,0]]]}"#,
            r#"{"n_qubits":1,"matrix":[[[1,0],[1,0]],[[0,0],[0,0]]]}"#,
            r#"{"n_qubits":1,"amplitudes":[[1,0],[0,0]],"matrix":[]}"#,
            r#"{"n_qubits":1,"amplitudes":[[1,0],[0,0]],"extra":1}"#,
        ] {
            assert!(parse_state(bad.as_bytes()).is_err(), "{bad}");
        }
        let ok = r#"{"n_qubits":1,"matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#;
        assert!(parse_state(ok.as_bytes()).is_ok());
    }

    #[test]
    fn files_carry_paths() {
        let dir = std::env::temp_dir().join(format!("entdetect-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("tree.json");
        save_tree(&p, &default_tree_2q()).unwrap();
        assert_eq!(load_tree(&p).unwrap(), default_tree_2q());
        let missing = dir.join("missing.json");
        let err = load_state(&missing).unwrap_err();
        assert!(err.to_string().contains("missing.json"));
        fs::write(&p, "{").unwrap();
        assert!(load_tree(&p).unwrap_err().to_string().contains("tree.json"));
        fs::remove_dir_all(&dir).unwrap();
    }
}
