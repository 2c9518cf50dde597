//! Correlation tensor elements, Bloch vectors and the sum-of-squares
//! entanglement criterion.
//!
//! A correlation `T_{k…l} = Tr[ρ (σ_k ⊗ … ⊗ σ_l)]` is a full correlation when
//! no party carries the identity. For any fully separable state the squares
//! of all full correlations sum to at most one, so exceeding one certifies
//! entanglement; for pure two-qubit states the converse holds as well.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::pauli::{CorrelationIndex, Pauli};
use crate::state::DensityMatrix;
use crate::tolerance::TOL;

/// Exact correlation `Tr[ρ P]` for a Pauli string `P`.
///
/// Uses the one-nonzero-per-column structure of Pauli strings instead of
/// building the operator.
pub fn correlation(rho: &DensityMatrix, idx: &CorrelationIndex) -> Result<f64> {
    let n = rho.n_qubits();
    if idx.n_parties() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: idx.n_parties(),
        });
    }
    let mut flip = 0usize;
    for (q, p) in idx.labels().iter().enumerate() {
        if matches!(p, Pauli::X | Pauli::Y) {
            flip |= 1 << (n - 1 - q);
        }
    }
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for col in 0..rho.dim() {
        let row = col ^ flip;
        // P[row, col]
        let mut phase = C64::new(1.0, 0.0);
        for (q, p) in idx.labels().iter().enumerate() {
            let bit = (col >> (n - 1 - q)) & 1;
            match p {
                Pauli::I | Pauli::X => {}
                Pauli::Y => phase *= if bit == 0 { C64::i() } else { -C64::i() },
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase
                    }
                }
            }
        }
        acc += m[(col, row)] * phase;
    }
    Ok(acc.re.clamp(-1.0, 1.0))
}

/// Correlation of local observables `n_1·σ ⊗ … ⊗ n_k·σ` for arbitrary
/// directions; `None` marks the identity on that party.
///
/// Expanded over the Pauli basis, so non-unit directions scale linearly.
pub fn directional_correlation(rho: &DensityMatrix, setting: &[Option<[f64; 3]>]) -> Result<f64> {
    let n = rho.n_qubits();
    if setting.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: setting.len(),
        });
    }
    let mut terms: Vec<(Vec<Pauli>, f64)> = vec![(Vec::with_capacity(n), 1.0)];
    for s in setting {
        terms = match s {
            None => terms
                .into_iter()
                .map(|(mut l, w)| {
                    l.push(Pauli::I);
                    (l, w)
                })
                .collect(),
            Some(dir) => terms
                .into_iter()
                .flat_map(|(l, w)| {
                    Pauli::AXES.iter().zip(dir).filter(|(_, c)| **c != 0.0).map(
                        move |(p, c)| {
                            let mut l = l.clone();
                            l.push(*p);
                            (l, w * c)
                        },
                    )
                })
                .collect(),
        };
    }
    let mut total = 0.0;
    for (labels, w) in terms {
        total += w * correlation(rho, &CorrelationIndex::new(labels)?)?;
    }
    Ok(total)
}

/// Local Bloch vector `(T_x, T_y, T_z)` of `party`.
pub fn bloch_vector(rho: &DensityMatrix, party: usize) -> Result<[f64; 3]> {
    let n = rho.n_qubits();
    if party >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: party + 1,
        });
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(Pauli::AXES) {
        *slot = correlation(rho, &CorrelationIndex::local(p, party, n))?;
    }
    Ok(out)
}

pub fn norm3(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// How a record was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    Exact,
    Sampled(u64),
}

/// One measured (or exactly computed) correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub index: CorrelationIndex,
    pub value: f64,
    pub stderr: f64,
    pub shots: Shots,
}

impl CorrelationRecord {
    pub fn exact(index: CorrelationIndex, value: f64) -> Self {
        Self {
            index,
            value,
            stderr: 0.0,
            shots: Shots::Exact,
        }
    }
}

/// Draws `n₊ ~ Binomial(shots, (1+T)/2)` and returns `((n₊−n₋)/shots, stderr)`.
pub fn sample_expectation<R: Rng + ?Sized>(exact: f64, shots: u64, rng: &mut R) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::Domain("shots must be positive".into()));
    }
    let p = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let plus = Binomial::new(shots, p)
        .map_err(|e| Error::Domain(e.to_string()))?
        .sample(rng);
    let value = (2.0 * plus as f64 - shots as f64) / shots as f64;
    let stderr = ((1.0 - value * value).max(0.0) / shots as f64).sqrt();
    Ok((value, stderr))
}

/// Finite-statistics estimate of a correlation.
pub fn sampled_correlation<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    idx: &CorrelationIndex,
    shots: u64,
    rng: &mut R,
) -> Result<CorrelationRecord> {
    let exact = correlation(rho, idx)?;
    let (value, stderr) = sample_expectation(exact, shots, rng)?;
    Ok(CorrelationRecord {
        index: idx.clone(),
        value,
        stderr,
        shots: Shots::Sampled(shots),
    })
}

/// All `3^n` full correlations of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n_qubits: usize,
    entries: Vec<(CorrelationIndex, f64)>,
}

impl CorrelationTensor {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &[(CorrelationIndex, f64)] {
        &self.entries
    }

    pub fn get(&self, idx: &CorrelationIndex) -> Option<f64> {
        self.entries.iter().find(|(i, _)| i == idx).map(|(_, v)| *v)
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }
}

pub fn full_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let entries = CorrelationIndex::all_full(rho.n_qubits())
        .into_iter()
        .map(|idx| correlation(rho, &idx).map(|v| (idx, v)))
        .collect::<Result<_>>()?;
    Ok(CorrelationTensor {
        n_qubits: rho.n_qubits(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriterionVerdict {
    Detected,
    Undecided,
}

/// Running sum of squared full correlations.
///
/// Adding a record returns a new state; the receiver is left untouched.
/// With sampled data the sum must clear 1 by `error_multiplier` propagated
/// standard errors before entanglement is reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionState {
    records: Vec<CorrelationRecord>,
    running_sum: f64,
    error_multiplier: f64,
}

impl Default for CriterionState {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl CriterionState {
    pub fn new(error_multiplier: f64) -> Self {
        Self {
            records: Vec::new(),
            running_sum: 0.0,
            error_multiplier,
        }
    }

    pub fn records(&self) -> &[CorrelationRecord] {
        &self.records
    }

    pub fn running_sum(&self) -> f64 {
        self.running_sum
    }

    /// `sqrt(Σ (2 T σ_T)²)`, first-order error of the sum.
    pub fn propagated_error(&self) -> f64 {
        self.records
            .iter()
            .map(|r| (2.0 * r.value * r.stderr).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn verdict(&self) -> CriterionVerdict {
        if self.running_sum - self.error_multiplier * self.propagated_error() > 1.0 + TOL.criterion {
            CriterionVerdict::Detected
        } else {
            CriterionVerdict::Undecided
        }
    }

    pub fn contains(&self, idx: &CorrelationIndex) -> bool {
        self.records.iter().any(|r| &r.index == idx)
    }

    pub fn add(&self, rec: CorrelationRecord) -> Result<(Self, CriterionVerdict)> {
        if !rec.index.is_full() {
            return Err(Error::NonFullCorrelation(rec.index.to_string()));
        }
        if let Some(first) = self.records.first() {
            if first.index.n_parties() != rec.index.n_parties() {
                return Err(Error::DimensionMismatch {
                    expected: first.index.n_parties(),
                    found: rec.index.n_parties(),
                });
            }
        }
        if self.contains(&rec.index) {
            return Err(Error::DuplicateIndex(rec.index.to_string()));
        }
        let mut next = self.clone();
        next.running_sum += rec.value * rec.value;
        next.records.push(rec);
        let verdict = next.verdict();
        Ok((next, verdict))
    }
}
