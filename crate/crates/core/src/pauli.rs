//! Pauli labels and multi-party correlation indices.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{tensor_all, ComplexMatrix, C64};
use crate::tolerance::MAX_QUBITS;

/// Single-qubit Pauli operator. `I` is the identity `σ_0`.
///
/// The derived ordering is `I < X < Y < Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn is_identity(self) -> bool {
        self == Pauli::I
    }

    /// 2×2 matrix in the computational basis.
    pub fn matrix(self) -> ComplexMatrix {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let data = match self {
            Pauli::I => vec![l, o, o, l],
            Pauli::X => vec![o, l, l, o],
            Pauli::Y => vec![o, -i, i, o],
            Pauli::Z => vec![l, o, o, -l],
        };
        ComplexMatrix::from_vec(2, 2, data).expect("2x2")
    }

    /// Unit Bloch axis; zero for the identity.
    pub fn axis(self) -> [f64; 3] {
        match self {
            Pauli::I => [0.0; 3],
            Pauli::X => [1.0, 0.0, 0.0],
            Pauli::Y => [0.0, 1.0, 0.0],
            Pauli::Z => [0.0, 0.0, 1.0],
        }
    }

    /// Position 0..3 within `(x, y, z)`; `None` for the identity.
    pub fn axis_index(self) -> Option<usize> {
        match self {
            Pauli::I => None,
            Pauli::X => Some(0),
            Pauli::Y => Some(1),
            Pauli::Z => Some(2),
        }
    }

    pub fn from_axis_index(i: usize) -> Pauli {
        Pauli::AXES[i]
    }

    /// Two single-qubit Paulis anti-commute iff both are non-identity and differ.
    pub fn anticommutes(self, other: Pauli) -> bool {
        !self.is_identity() && !other.is_identity() && self != other
    }

    /// Successor in the axis cycle `z → y → x → z`; identity is fixed.
    pub fn cycle_next(self) -> Pauli {
        match self {
            Pauli::I => Pauli::I,
            Pauli::Z => Pauli::Y,
            Pauli::Y => Pauli::X,
            Pauli::X => Pauli::Z,
        }
    }

    /// Applies `cycle_next` `steps` times.
    pub fn cycle_by(self, steps: u8) -> Pauli {
        (0..steps % 3).fold(self, |p, _| p.cycle_next())
    }

    /// Number of `cycle_next` steps taking `from` to `self` (both non-identity).
    pub fn cycle_distance(from: Pauli, to: Pauli) -> u8 {
        (0..3u8)
            .find(|&k| from.cycle_by(k) == to)
            .expect("non-identity labels")
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => '0',
            Pauli::X => 'x',
            Pauli::Y => 'y',
            Pauli::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            '0' | 'i' | 'I' => Some(Pauli::I),
            'x' | 'X' => Some(Pauli::X),
            'y' | 'Y' => Some(Pauli::Y),
            'z' | 'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One Pauli label per party, e.g. `zz`, `xzz`, `z0`.
///
/// Ordered lexicographically by party with `I < X < Y < Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelationIndex(Vec<Pauli>);

impl CorrelationIndex {
    pub fn new(labels: Vec<Pauli>) -> Result<Self> {
        if labels.is_empty() || labels.len() > MAX_QUBITS {
            return Err(Error::UnsupportedDimension(labels.len()));
        }
        Ok(Self(labels))
    }

    /// The same label on every party.
    pub fn uniform(label: Pauli, n: usize) -> Self {
        Self(vec![label; n])
    }

    /// Single-party operator: `label` at `party`, identity elsewhere.
    pub fn local(label: Pauli, party: usize, n: usize) -> Self {
        let mut v = vec![Pauli::I; n];
        v[party] = label;
        Self(v)
    }

    pub fn n_parties(&self) -> usize {
        self.0.len()
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.0
    }

    /// No party carries the identity.
    pub fn is_full(&self) -> bool {
        self.0.iter().all(|p| !p.is_identity())
    }

    /// Kronecker product of the per-party Pauli matrices.
    pub fn operator(&self) -> ComplexMatrix {
        let mats: Vec<ComplexMatrix> = self.0.iter().map(|p| p.matrix()).collect();
        tensor_all(&mats)
    }

    /// Tensor products of Paulis anti-commute iff the number of positions
    /// holding two different non-identity labels is odd.
    pub fn anticommutes(&self, other: &Self) -> Result<bool> {
        if self.n_parties() != other.n_parties() {
            return Err(Error::DimensionMismatch {
                expected: self.n_parties(),
                found: other.n_parties(),
            });
        }
        Ok(self.anticommutes_unchecked(other))
    }

    pub(crate) fn anticommutes_unchecked(&self, other: &Self) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| a.anticommutes(**b))
            .count()
            % 2
            == 1
    }

    /// All `3^n` full indices in `Ord` order (`x < y < z` per party).
    pub fn all_full(n: usize) -> Vec<CorrelationIndex> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<Pauli>| {
                    Pauli::AXES.iter().map(move |&p| {
                        let mut v = prefix.clone();
                        v.push(p);
                        v
                    })
                })
                .collect();
        }
        out.into_iter().map(CorrelationIndex).collect()
    }

    /// Applies a per-party cyclic axis renaming.
    pub fn renamed(&self, shifts: &[u8]) -> Self {
        Self(
            self.0
                .iter()
                .zip(shifts)
                .map(|(p, &s)| p.cycle_by(s))
                .collect(),
        )
    }
}

impl fmt::Display for CorrelationIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for CorrelationIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::Parse(format!("invalid Pauli label {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if labels.is_empty() || labels.len() > MAX_QUBITS {
            return Err(Error::Parse(format!(
                "correlation index {s:?} must name 1..={MAX_QUBITS} parties"
            )));
        }
        Ok(Self(labels))
    }
}

impl Serialize for CorrelationIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CorrelationIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
