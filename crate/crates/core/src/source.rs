//! Measurement sources: the only way detection strategies see a state.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correlations::{directional_correlation, sample_expectation, CorrelationRecord, Shots};
use crate::error::{Error, Result};
use crate::pauli::CorrelationIndex;
use crate::rng::{rng_from_seed, SimRng};
use crate::schmidt::{apply_filter, FilterOp};
use crate::state::DensityMatrix;

/// One local setting per party: a Bloch direction, or `None` for the identity.
pub type Setting = Vec<Option<[f64; 3]>>;

/// Setting that measures `idx` along the source's own x, y, z axes.
pub fn setting_for(idx: &CorrelationIndex) -> Setting {
    idx.labels()
        .iter()
        .map(|p| (!p.is_identity()).then(|| p.axis()))
        .collect()
}

/// Result of a single query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub shots: Shots,
}

pub trait MeasurementSource {
    fn n_qubits(&self) -> usize;

    /// Expectation of the product of the given local observables.
    fn measure(&mut self, setting: &[Option<[f64; 3]>]) -> Result<Estimate>;

    /// Applies a local filter; on success subsequent queries see the
    /// post-selected state. Returns the success probability.
    fn filter(&mut self, op: &FilterOp) -> Result<f64>;

    /// Measures `idx` in the source's axes and labels the record with it.
    fn measure_index(&mut self, idx: &CorrelationIndex) -> Result<CorrelationRecord> {
        let e = self.measure(&setting_for(idx))?;
        Ok(CorrelationRecord {
            index: idx.clone(),
            value: e.value,
            stderr: e.stderr,
            shots: e.shots,
        })
    }
}

/// Shots per correlation when none are given; about 0.015 standard error
/// near zero.
pub const DEFAULT_SHOTS: u64 = 4500;

/// Exact expectation values or binomially sampled estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Shots(u64),
}

impl Mode {
    pub fn is_exact(self) -> bool {
        self == Mode::Exact
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::Shots(n) => write!(f, "shots={n}"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    /// `exact`, `shots` or `shots=N`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => return Ok(Mode::Exact),
            "shots" => return Ok(Mode::Shots(DEFAULT_SHOTS)),
            _ => {}
        }
        let n = s
            .strip_prefix("shots=")
            .ok_or_else(|| Error::Parse(format!("unknown mode {s:?}")))?
            .parse::<u64>()
            .map_err(|e| Error::Parse(format!("shot count in {s:?}: {e}")))?;
        if n == 0 {
            return Err(Error::Parse("shot count must be positive".into()));
        }
        Ok(Mode::Shots(n))
    }
}

/// A simulated laboratory holding a hidden density matrix.
#[derive(Debug, Clone)]
pub struct SimulatedSource {
    state: DensityMatrix,
    mode: Mode,
    rng: SimRng,
    queries: usize,
}

impl SimulatedSource {
    pub fn new(state: DensityMatrix, mode: Mode, seed: u64) -> Self {
        Self::with_rng(state, mode, rng_from_seed(seed))
    }

    pub fn with_rng(state: DensityMatrix, mode: Mode, rng: SimRng) -> Self {
        Self {
            state,
            mode,
            rng,
            queries: 0,
        }
    }

    pub fn exact(state: DensityMatrix) -> Self {
        Self::new(state, Mode::Exact, 0)
    }

    /// Current (possibly filtered) state.
    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn queries(&self) -> usize {
        self.queries
    }
}

impl MeasurementSource for SimulatedSource {
    fn n_qubits(&self) -> usize {
        self.state.n_qubits()
    }

    fn measure(&mut self, setting: &[Option<[f64; 3]>]) -> Result<Estimate> {
        let exact = directional_correlation(&self.state, setting)?.clamp(-1.0, 1.0);
        self.queries += 1;
        match self.mode {
            Mode::Exact => Ok(Estimate {
                value: exact,
                stderr: 0.0,
                shots: Shots::Exact,
            }),
            Mode::Shots(n) => {
                let (value, stderr) = sample_expectation(exact, n, &mut self.rng)?;
                Ok(Estimate {
                    value,
                    stderr,
                    shots: Shots::Sampled(n),
                })
            }
        }
    }

    fn filter(&mut self, op: &FilterOp) -> Result<f64> {
        let (next, p) = apply_filter(&self.state, op)?;
        self.state = next;
        Ok(p)
    }
}

/// Replays fixed values per correlation index; for scripted traces.
///
/// Queries must be along coordinate axes. Unknown indices are an error
/// unless a default value is set.
#[derive(Debug, Clone, Default)]
pub struct TableSource {
    n_qubits: usize,
    values: HashMap<CorrelationIndex, f64>,
    default: Option<f64>,
}

impl TableSource {
    pub fn new<I, S>(n_qubits: usize, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut map = HashMap::new();
        for (k, v) in values {
            let idx: CorrelationIndex = k.as_ref().parse()?;
            if idx.n_parties() != n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: n_qubits,
                    found: idx.n_parties(),
                });
            }
            map.insert(idx, v);
        }
        Ok(Self {
            n_qubits,
            values: map,
            default: None,
        })
    }

    pub fn with_default(mut self, value: f64) -> Self {
        self.default = Some(value);
        self
    }
}

fn axis_label(dir: &[f64; 3]) -> Option<crate::pauli::Pauli> {
    let nonzero: Vec<usize> = (0..3).filter(|&i| dir[i] != 0.0).collect();
    match nonzero.as_slice() {
        [i] if dir[*i] == 1.0 => Some(crate::pauli::Pauli::from_axis_index(*i)),
        _ => None,
    }
}

impl MeasurementSource for TableSource {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn measure(&mut self, setting: &[Option<[f64; 3]>]) -> Result<Estimate> {
        if setting.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: setting.len(),
            });
        }
        let labels = setting
            .iter()
            .map(|s| match s {
                None => Some(crate::pauli::Pauli::I),
                Some(d) => axis_label(d),
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Domain("table source only answers axis-aligned queries".into()))?;
        let idx = CorrelationIndex::new(labels)?;
        let value = self
            .values
            .get(&idx)
            .copied()
            .or(self.default)
            .ok_or_else(|| Error::Domain(format!("no recorded value for {idx}")))?;
        Ok(Estimate {
            value,
            stderr: 0.0,
            shots: Shots::Exact,
        })
    }

    fn filter(&mut self, _op: &FilterOp) -> Result<f64> {
        Err(Error::Domain("table source cannot filter".into()))
    }
}
