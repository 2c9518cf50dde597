//! Quantum states: validated carriers, named constructors, random ensembles
//! and local frame changes.
//!
//! Qubit 0 is the most significant bit of a basis index, so the first
//! party is the slowest-varying Kronecker factor. `|0⟩` and `|1⟩` stand for
//! horizontal and vertical polarisation; `|+⟩ = (|0⟩ + |1⟩)/√2` is +45°.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, tensor_all, ComplexMatrix, C64};
use crate::pauli::Pauli;
use crate::tolerance::{MAX_QUBITS, TOL};

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a power of two"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    check_qubits(n)?;
    Ok(n)
}

/// Unit-norm state vector on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates length `2^n` and unit norm within tolerance.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > TOL.state {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales to unit norm. Fails for a (numerically) zero vector.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let nrm = norm(&amplitudes);
        if !(nrm > TOL.zero) || !nrm.is_finite() {
            return Err(Error::ZeroProjection { norm: nrm });
        }
        Self::new(amplitudes.into_iter().map(|z| z / nrm).collect())
    }

    /// Computational basis state `|bits⟩`.
    pub fn basis(n: usize, bits: usize) -> Result<Self> {
        check_qubits(n)?;
        if bits >= 1 << n {
            return Err(Error::Domain(format!("basis index {bits} out of range")));
        }
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        v[bits] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: ComplexMatrix::outer(&self.amplitudes),
        }
    }

    /// `|⟨self|other⟩|²`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm_sqr()
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian, unit-trace, positive semidefinite matrix on `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let n_qubits = qubits_for_dim(matrix.rows())?;
        if matrix
            .as_slice()
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let defect = matrix.hermitian_defect();
        if defect > TOL.state {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {defect:.3e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL.state || tr.im.abs() > TOL.state {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eigenvalues(&matrix)?[0];
        if min < -TOL.state {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { n_qubits, matrix })
    }

    /// `1/2^n`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let d = 1usize << n;
        Ok(Self {
            n_qubits: n,
            matrix: ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::Domain(format!("mixing weight {w} outside [0,1]")));
        }
        let m = &self.matrix.scale(C64::new(w, 0.0)) + &other.matrix.scale(C64::new(1.0 - w, 0.0));
        Ok(Self {
            n_qubits: self.n_qubits,
            matrix: m,
        })
    }

    /// Transpose on the qubit `party`.
    pub fn partial_transpose(&self, party: usize) -> Result<ComplexMatrix> {
        if party >= self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: party + 1,
            });
        }
        let d = self.dim();
        let bit = 1usize << (self.n_qubits - 1 - party);
        let mut out = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                // Swap the `party` bits of row and column.
                let (rb, cb) = (r & bit, c & bit);
                let r2 = (r & !bit) | cb;
                let c2 = (c & !bit) | rb;
                out[(r2, c2)] = self.matrix[(r, c)];
            }
        }
        Ok(out)
    }

    /// Rebuilds the matrix from validated parts; used after operations that
    /// preserve the invariants by construction.
    pub(crate) fn from_parts_unchecked(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        Self { n_qubits, matrix }
    }
}

/// One 2×2 unitary per party.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    unitaries: Vec<ComplexMatrix>,
}

impl LocalFrame {
    pub fn new(unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        check_qubits(unitaries.len())?;
        for u in &unitaries {
            if u.rows() != 2 || u.cols() != 2 || !u.is_unitary(TOL.state) {
                return Err(Error::Domain("frame factor is not a 2x2 unitary".into()));
            }
        }
        Ok(Self { unitaries })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![ComplexMatrix::identity(2); n])
    }

    pub fn n_parties(&self) -> usize {
        self.unitaries.len()
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    /// `U_1 ⊗ … ⊗ U_n`.
    pub fn operator(&self) -> ComplexMatrix {
        tensor_all(&self.unitaries)
    }
}

/// `(U_1⊗…⊗U_n) ρ (U_1⊗…⊗U_n)†`.
pub fn apply_frame(state: &DensityMatrix, frame: &LocalFrame) -> Result<DensityMatrix> {
    if frame.n_parties() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: frame.n_parties(),
        });
    }
    let m = state.matrix().conjugate_by(&frame.operator());
    Ok(DensityMatrix::from_parts_unchecked(state.n_qubits(), hermitize(m)))
}

/// Frame change on a pure state vector.
pub fn apply_frame_pure(state: &PureState, frame: &LocalFrame) -> Result<PureState> {
    if frame.n_parties() != state.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: frame.n_parties(),
        });
    }
    PureState::normalized(frame.operator().apply(state.amplitudes()))
}

/// Removes the anti-Hermitian rounding residue.
pub(crate) fn hermitize(m: ComplexMatrix) -> ComplexMatrix {
    let h = m.adjoint();
    (&m + &h).scale(C64::new(0.5, 0.0))
}

/// `Tr ρ²`.
pub fn purity(state: &DensityMatrix) -> f64 {
    state.matrix().trace_product(state.matrix()).re
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_with_pure(state: &DensityMatrix, target: &PureState) -> Result<f64> {
    if state.n_qubits() != target.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: state.n_qubits(),
            found: target.n_qubits(),
        });
    }
    let rv = state.matrix().apply(target.amplitudes());
    Ok(target
        .amplitudes()
        .iter()
        .zip(&rv)
        .map(|(a, b)| a.conj() * b)
        .sum::<C64>()
        .re)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("probability {p} outside [0,1]")));
    }
    Ok(())
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> PureState {
    PureState::new(vec![c(FRAC_1_SQRT_2), c(0.0), c(0.0), c(FRAC_1_SQRT_2)]).expect("normalised")
}

/// Singlet `(|01⟩ − |10⟩)/√2`.
pub fn singlet() -> PureState {
    PureState::new(vec![c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)]).expect("normalised")
}

/// `cos θ |00⟩ + e^{iφ} sin θ |11⟩`.
pub fn schmidt_state(theta: f64, phase: f64) -> PureState {
    let s = C64::from_polar(theta.sin(), phase);
    PureState::new(vec![c(theta.cos()), c(0.0), c(0.0), s]).expect("normalised")
}

/// Product of single-qubit states.
pub fn product_state(factors: &[PureState]) -> Result<PureState> {
    if factors.iter().any(|f| f.n_qubits() != 1) {
        return Err(Error::Domain("product factors must be single qubits".into()));
    }
    check_qubits(factors.len())?;
    let amps = factors
        .iter()
        .skip(1)
        .fold(factors[0].amplitudes().to_vec(), |acc, f| {
            crate::linalg::tensor_vec(&acc, f.amplitudes())
        });
    PureState::normalized(amps)
}

/// Single-qubit pure state with Bloch vector along `direction`.
pub fn qubit_along(direction: [f64; 3]) -> Result<PureState> {
    let n = (direction.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if !(n > TOL.zero) {
        return Err(Error::Domain("zero Bloch direction".into()));
    }
    let [x, y, z] = direction.map(|v| v / n);
    let half = z.clamp(-1.0, 1.0).acos() / 2.0;
    let phi = y.atan2(x);
    PureState::new(vec![c(half.cos()), C64::from_polar(half.sin(), phi)])
}

pub fn plus() -> PureState {
    qubit_along(Pauli::X.axis()).expect("unit axis")
}

/// `p |ψ⁻⟩⟨ψ⁻| + (1−p) 𝟙/4`.
pub fn make_werner(p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    singlet()
        .density()
        .mix(&DensityMatrix::maximally_mixed(2)?, p)
}

/// `p |ψ⁻⟩⟨ψ⁻| + (1−p) |01⟩⟨01|`.
pub fn make_colored(p: f64) -> Result<DensityMatrix> {
    check_probability(p)?;
    singlet().density().mix(&PureState::basis(2, 0b01)?.density(), p)
}

/// Dicke state `D_n^(k)`: uniform superposition of weight-`k` bit strings.
pub fn make_dicke(n: usize, k: usize) -> Result<PureState> {
    check_qubits(n)?;
    if k > n {
        return Err(Error::Domain(format!("dicke excitation {k} exceeds {n} qubits")));
    }
    let amps = (0..1usize << n)
        .map(|b| if b.count_ones() as usize == k { c(1.0) } else { c(0.0) })
        .collect();
    PureState::normalized(amps)
}

/// `(⟨dir| ⊗ 𝟙) |state⟩`, renormalised; removes the first qubit.
pub fn project_first_qubit(state: &PureState, direction: &PureState) -> Result<PureState> {
    if state.n_qubits() < 2 {
        return Err(Error::UnsupportedDimension(state.n_qubits()));
    }
    if direction.n_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: direction.n_qubits(),
        });
    }
    let half = 1usize << (state.n_qubits() - 1);
    let d = direction.amplitudes();
    let a = state.amplitudes();
    let out: Vec<C64> = (0..half)
        .map(|j| d[0].conj() * a[j] + d[1].conj() * a[half + j])
        .collect();
    let nrm = norm(&out);
    if nrm < TOL.zero {
        return Err(Error::ZeroProjection { norm: nrm });
    }
    PureState::normalized(out)
}

/// Three-qubit W state, from `D_4^(2)` with the first photon vertical.
pub fn w_state() -> PureState {
    let d = make_dicke(4, 2).expect("valid");
    project_first_qubit(&d, &PureState::basis(1, 1).expect("valid")).expect("non-zero")
}

/// Three-qubit G state, from `D_4^(2)` with the first photon at +45°.
pub fn g_state() -> PureState {
    let d = make_dicke(4, 2).expect("valid");
    project_first_qubit(&d, &plus()).expect("non-zero")
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random pure state (normalised complex Gaussian vector).
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PureState> {
    check_qubits(n)?;
    loop {
        let v: Vec<C64> = (0..1usize << n).map(|_| complex_gaussian(rng)).collect();
        if norm(&v) > 1e-6 {
            return PureState::normalized(v);
        }
    }
}

/// Random mixed-state ensemble, `ρ = G G† / Tr(G G†)` with `G` a
/// `2^n × k` complex Ginibre matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// Square `G` (`k = 2^n`): the Hilbert–Schmidt measure.
    #[default]
    HilbertSchmidt,
    /// Fixed ancilla dimension `k`.
    Induced(usize),
    /// `k` drawn uniformly from `1..=2^n` per sample; covers all ranks.
    MixedRank,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ensemble::HilbertSchmidt => write!(f, "hs"),
            Ensemble::Induced(k) => write!(f, "induced:{k}"),
            Ensemble::MixedRank => write!(f, "mixed-rank"),
        }
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hs" | "hilbert-schmidt" | "ginibre" => Ok(Ensemble::HilbertSchmidt),
            "mixed-rank" => Ok(Ensemble::MixedRank),
            _ => {
                let k = s
                    .strip_prefix("induced:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown ensemble {s:?}")))?;
                Ok(Ensemble::Induced(k))
            }
        }
    }
}

/// Hilbert–Schmidt random mixed state.
pub fn random_mixed<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    random_mixed_from(Ensemble::HilbertSchmidt, n, rng)
}

pub fn random_mixed_from<R: Rng + ?Sized>(
    ensemble: Ensemble,
    n: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    check_qubits(n)?;
    let d = 1usize << n;
    let k = match ensemble {
        Ensemble::HilbertSchmidt => d,
        Ensemble::Induced(k) if k >= 1 => k,
        Ensemble::Induced(_) => return Err(Error::Domain("ancilla dimension must be >= 1".into())),
        Ensemble::MixedRank => rng.random_range(1..=d),
    };
    let g = ComplexMatrix::from_vec(d, k, (0..d * k).map(|_| complex_gaussian(rng)).collect())?;
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    let m = hermitize(w.scale(C64::new(1.0 / tr, 0.0)));
    Ok(DensityMatrix::from_parts_unchecked(n, m))
}

/// Haar-random 2×2 unitary from a uniformly random unit quaternion.
pub fn random_qubit_unitary<R: Rng + ?Sized>(rng: &mut R) -> ComplexMatrix {
    loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-9 {
            continue;
        }
        let [a, b, cc, d] = q.map(|x| x / n);
        return ComplexMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(a, b),
                C64::new(cc, d),
                C64::new(-cc, d),
                C64::new(a, -b),
            ],
        )
        .expect("2x2");
    }
}

/// Independent Haar unitaries for each party.
pub fn random_frame<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<LocalFrame> {
    check_qubits(n)?;
    LocalFrame::new((0..n).map(|_| random_qubit_unitary(rng)).collect())
}
