//! Experimental Schmidt decomposition of two-qubit states.
//!
//! Calibration: both parties measure their local Bloch vectors. For a pure
//! state `cos θ |a⟩|b⟩ + sin θ e^{iφ} |a⊥⟩|b̃⊥⟩` these point along `|a⟩` and
//! `|b⟩` with length `cos 2θ`, which fixes both Schmidt bases up to the
//! relative phase `φ`. When the Bloch vectors vanish (maximal entanglement,
//! every basis is a Schmidt basis) Bob applies the local filter
//! `F = |0⟩⟨0| + ε|1⟩⟨1|`; on success Alice's Bloch vector reappears along
//! the partner of Bob's `|0⟩`.
//!
//! Verification: in the calibrated frames `T_{z'z''} = 1` and
//! `T_{y'y''}² + T_{x'y''}² = sin² 2θ`, so measuring `z'z''`, `y'y''` and,
//! when the phase says `y'y''` did not capture the whole weight, `x'y''`,
//! gives `Σ T² = 1 + sin² 2θ`.
//!
//! Basis vectors follow
//! `|a⟩ = cos ξ |0⟩ + e^{iϕ} sin ξ |1⟩`, `|a⊥⟩ = sin ξ |0⟩ − e^{iϕ} cos ξ |1⟩`,
//! with Bloch direction `(sin 2ξ cos ϕ, sin 2ξ sin ϕ, cos 2ξ)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::correlations::{norm3, CorrelationRecord, CriterionState, Shots};
use crate::detection::{DetectionResult, Stage, Step, Strategy, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{svd, tensor_all, ComplexMatrix, C64};
use crate::pauli::{CorrelationIndex, Pauli};
use crate::source::MeasurementSource;
use crate::state::{hermitize, DensityMatrix, PureState};
use crate::tolerance::TOL;

/// Polar angles `(ξ, ϕ)` of a single-qubit basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisAngles {
    pub xi: f64,
    pub phi: f64,
}

/// Phase convention for the perpendicular basis vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerpConvention {
    /// `|a⊥⟩ = sin ξ |0⟩ − e^{iϕ} cos ξ |1⟩`.
    #[default]
    Standard,
    /// The same vector multiplied by `e^{−iϕ}`.
    Rephased,
}

pub fn basis_to_bloch(angles: BasisAngles) -> [f64; 3] {
    let s = (2.0 * angles.xi).sin();
    [s * angles.phi.cos(), s * angles.phi.sin(), (2.0 * angles.xi).cos()]
}

/// Inverse of [`basis_to_bloch`] on the direction of `alpha`.
///
/// Returns `ξ ∈ [0, π/2]`, `ϕ ∈ [0, 2π)`; `ϕ = 0` at the poles.
pub fn bloch_to_basis(alpha: [f64; 3], threshold: f64) -> Result<BasisAngles> {
    let norm = norm3(&alpha);
    if !(norm >= threshold) || !(norm > TOL.zero) {
        return Err(Error::DegenerateDirection { norm, threshold });
    }
    let [x, y, z] = alpha.map(|v| v / norm);
    let xi = z.clamp(-1.0, 1.0).acos() / 2.0;
    let phi = if (2.0 * xi).sin() < 1e-12 {
        0.0
    } else {
        y.atan2(x).rem_euclid(TAU)
    };
    Ok(BasisAngles { xi, phi })
}

/// `(|a⟩, |a⊥⟩)` for the given angles.
pub fn basis_vectors(angles: BasisAngles, convention: PerpConvention) -> ([C64; 2], [C64; 2]) {
    let (c, s) = (angles.xi.cos(), angles.xi.sin());
    let e = C64::from_polar(1.0, angles.phi);
    let a = [C64::new(c, 0.0), e * s];
    let perp = [C64::new(s, 0.0), -e * c];
    let perp = match convention {
        PerpConvention::Standard => perp,
        PerpConvention::Rephased => perp.map(|z| z * e.conj()),
    };
    (a, perp)
}

/// Bloch directions of the local observables built from a basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalAxes {
    /// `|a⟩⟨a⊥| + |a⊥⟩⟨a|`
    pub x: [f64; 3],
    /// `i|a⊥⟩⟨a| − i|a⟩⟨a⊥|`
    pub y: [f64; 3],
    /// `|a⟩⟨a| − |a⊥⟩⟨a⊥|`
    pub z: [f64; 3],
}

impl LocalAxes {
    pub fn axis(&self, p: Pauli) -> Option<[f64; 3]> {
        match p {
            Pauli::I => None,
            Pauli::X => Some(self.x),
            Pauli::Y => Some(self.y),
            Pauli::Z => Some(self.z),
        }
    }
}

fn operator_direction(op: &ComplexMatrix) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(Pauli::AXES) {
        *slot = p.matrix().trace_product(op).re / 2.0;
    }
    out
}

pub fn local_axes(a: &[C64; 2], perp: &[C64; 2]) -> LocalAxes {
    let ket_bra = |u: &[C64; 2], v: &[C64; 2]| {
        let mut m = ComplexMatrix::zeros(2, 2);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = u[i] * v[j].conj();
            }
        }
        m
    };
    let aa = ket_bra(a, a);
    let pp = ket_bra(perp, perp);
    let ap = ket_bra(a, perp);
    let pa = ket_bra(perp, a);
    let i = C64::i();
    LocalAxes {
        x: operator_direction(&(&ap + &pa)),
        y: operator_direction(&(&pa.scale(i) - &ap.scale(i))),
        z: operator_direction(&(&aa - &pp)),
    }
}

/// Schmidt decomposition `cos θ |a⟩|b⟩ + sin θ |a⊥⟩|b⊥⟩` computed by SVD of
/// the 2×2 amplitude matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    /// In `[0, π/4]`.
    pub theta: f64,
    pub a: [C64; 2],
    pub a_perp: [C64; 2],
    pub b: [C64; 2],
    pub b_perp: [C64; 2],
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> Vec<C64> {
        let (c, s) = (self.theta.cos(), self.theta.sin());
        let mut out = Vec::with_capacity(4);
        for i in 0..2 {
            for j in 0..2 {
                out.push(self.a[i] * self.b[j] * c + self.a_perp[i] * self.b_perp[j] * s);
            }
        }
        out
    }

    /// `1 + sin² 2θ`, the verification sum in the Schmidt frames.
    pub fn verification_sum(&self) -> f64 {
        1.0 + (2.0 * self.theta).sin().powi(2)
    }
}

pub fn schmidt_oracle(psi: &PureState) -> Result<SchmidtDecomposition> {
    if psi.n_qubits() != 2 {
        return Err(Error::UnsupportedDimension(psi.n_qubits()));
    }
    let amps = psi.amplitudes().to_vec();
    let m = ComplexMatrix::from_vec(2, 2, amps)?;
    let d = svd(&m);
    let col = |mat: &ComplexMatrix, j: usize| [mat[(0, j)], mat[(1, j)]];
    let conj = |v: [C64; 2]| v.map(|z| z.conj());
    let (s0, s1) = (d.singular_values[0], d.singular_values[1]);
    Ok(SchmidtDecomposition {
        theta: s1.atan2(s0),
        a: col(&d.u, 0),
        a_perp: col(&d.u, 1),
        b: conj(col(&d.v, 0)),
        b_perp: conj(col(&d.v, 1)),
    })
}

/// Local filter `|b₀⟩⟨b₀| + ε |b₁⟩⟨b₁|` on one party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterOp {
    pub party: usize,
    pub epsilon: f64,
    pub basis: [[C64; 2]; 2],
}

impl FilterOp {
    pub fn new(party: usize, epsilon: f64, basis: [[C64; 2]; 2]) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::Domain(format!("filter strength {epsilon} outside (0,1]")));
        }
        let [b0, b1] = &basis;
        let n0: f64 = b0.iter().map(|z| z.norm_sqr()).sum();
        let n1: f64 = b1.iter().map(|z| z.norm_sqr()).sum();
        let overlap: C64 = b0.iter().zip(b1).map(|(x, y)| x.conj() * y).sum();
        if (n0 - 1.0).abs() > TOL.state || (n1 - 1.0).abs() > TOL.state || overlap.norm() > TOL.state {
            return Err(Error::Domain("filter basis is not orthonormal".into()));
        }
        Ok(Self {
            party,
            epsilon,
            basis,
        })
    }

    /// Filter in the party's computational basis.
    pub fn computational(party: usize, epsilon: f64) -> Result<Self> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        Self::new(party, epsilon, [[l, o], [o, l]])
    }

    /// The 2×2 filter operator.
    pub fn operator(&self) -> ComplexMatrix {
        let [b0, b1] = &self.basis;
        let p0 = ComplexMatrix::outer(b0);
        let p1 = ComplexMatrix::outer(b1);
        &p0 + &p1.scale(C64::new(self.epsilon, 0.0))
    }
}

/// Post-selected state `F ρ F† / p` and success probability `p = Tr[F ρ F†]`.
pub fn apply_filter(rho: &DensityMatrix, f: &FilterOp) -> Result<(DensityMatrix, f64)> {
    let n = rho.n_qubits();
    if f.party >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.party + 1,
        });
    }
    let factors: Vec<ComplexMatrix> = (0..n)
        .map(|q| if q == f.party { f.operator() } else { ComplexMatrix::identity(2) })
        .collect();
    let full = tensor_all(&factors);
    let out = rho.matrix().conjugate_by(&full);
    let p = out.trace().re;
    if !(p >= TOL.zero) {
        return Err(Error::ZeroSuccess { probability: p });
    }
    let m = hermitize(out.scale(C64::new(1.0 / p, 0.0)));
    Ok((DensityMatrix::from_parts_unchecked(n, m), p.min(1.0)))
}

/// Smallest admissible `1 − |α|²` in [`relative_phase`].
pub const PHASE_RADICAND_MIN: f64 = 1e-6;

/// `cos φ = T_yy / sqrt(1 − |α|²)`, clamped to `[−1, 1]`.
///
/// `t_yy` is measured in the calibrated frames; for a pure state the
/// denominator equals `sin 2θ`.
pub fn relative_phase(t_yy: f64, bloch_a: [f64; 3]) -> Result<f64> {
    let radicand = 1.0 - bloch_a.iter().map(|x| x * x).sum::<f64>();
    if !(radicand >= PHASE_RADICAND_MIN) {
        return Err(Error::DegenerateDenominator { value: radicand.max(0.0).sqrt() });
    }
    Ok((t_yy / radicand.sqrt()).clamp(-1.0, 1.0))
}

/// Missing weight below which `y'y''` counts as saturated with exact data.
pub const SATURATION_TOL: f64 = 1e-9;

/// Schmidt weight not captured by `y'y''`, `(1 − |α|²) − T_yy²`, clamped at
/// zero, and its first-order standard error.
pub fn missing_weight(t_yy: f64, sigma_yy: f64, alpha: &[f64; 3], sigma_alpha: &[f64; 3]) -> (f64, f64) {
    let w = 1.0 - alpha.iter().map(|a| a * a).sum::<f64>() - t_yy * t_yy;
    let var = alpha
        .iter()
        .zip(sigma_alpha)
        .map(|(a, s)| (2.0 * a * s).powi(2))
        .sum::<f64>()
        + (2.0 * t_yy * sigma_yy).powi(2);
    (w.max(0.0), var.sqrt())
}

/// When to measure the extra correlation `x'y''` (equal to `y'x''` on pure
/// states).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "value")]
pub enum PhasePolicy {
    /// Unless [`missing_weight`] plus three standard errors is within the
    /// error of Σ, i.e. `y'y''` already holds the whole Schmidt weight.
    Saturation,
    /// When `|cos φ|` is below the given value.
    Threshold(f64),
    /// Always; skips reading the phase.
    AlwaysExtra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    /// Bloch norm below which a local vector counts as vanishing (exact data).
    pub vanishing_threshold: f64,
    /// With sampled data a Bloch vector also vanishes below this many
    /// standard errors of its norm. The default of 25 asks for the
    /// direction to about 0.04 rad; a tilted frame lowers Σ quadratically
    /// in the tilt.
    pub vanishing_sigmas: f64,
    pub epsilon: f64,
    pub filter_party: usize,
    pub phase_policy: PhasePolicy,
    pub convention: PerpConvention,
    /// Standard errors subtracted from Σ before comparing with 1.
    pub error_multiplier: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            vanishing_threshold: 0.1,
            vanishing_sigmas: 25.0,
            epsilon: 0.5,
            filter_party: 1,
            phase_policy: PhasePolicy::Saturation,
            convention: PerpConvention::Standard,
            error_multiplier: 1.0,
        }
    }
}

/// Calibrated frames and the derived Schmidt parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtFrame {
    pub alice: BasisAngles,
    pub bob: BasisAngles,
    /// `cos φ`; `None` when the phase denominator is degenerate or the
    /// policy skips it. An unknown phase always adds `x'y''`.
    pub cos_relative_phase: Option<f64>,
    /// Schmidt angle estimated from the verification data, if the
    /// measured pair determines it.
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub result: DetectionResult,
    pub frame: Option<SchmidtFrame>,
}

struct LocalStage {
    bloch: [[f64; 3]; 2],
    stderr: [[f64; 3]; 2],
    sampled: bool,
}

fn measure_local<S: MeasurementSource + ?Sized>(
    source: &mut S,
    stage: Stage,
    transcript: &mut Vec<Step>,
) -> Result<LocalStage> {
    let mut bloch = [[0.0; 3]; 2];
    let mut stderr = [[0.0; 3]; 2];
    let mut sampled = false;
    for party in 0..2 {
        for (k, p) in Pauli::AXES.into_iter().enumerate() {
            let rec = source.measure_index(&CorrelationIndex::local(p, party, 2))?;
            bloch[party][k] = rec.value;
            stderr[party][k] = rec.stderr;
            sampled |= matches!(rec.shots, Shots::Sampled(_));
            transcript.push(Step::Measurement { stage, record: rec });
        }
    }
    Ok(LocalStage {
        bloch,
        stderr,
        sampled,
    })
}

impl LocalStage {
    /// First-order standard error of the Bloch norm.
    fn norm_error(&self, party: usize) -> f64 {
        let v = &self.bloch[party];
        let norm = norm3(v);
        if norm <= TOL.zero {
            return 0.0;
        }
        v.iter()
            .zip(&self.stderr[party])
            .map(|(x, s)| (x * s).powi(2))
            .sum::<f64>()
            .sqrt()
            / norm
    }

    fn vanishes(&self, party: usize, config: &ProtocolConfig) -> bool {
        let norm = norm3(&self.bloch[party]);
        if norm <= TOL.zero {
            return true;
        }
        if !self.sampled {
            return norm < config.vanishing_threshold;
        }
        norm < config.vanishing_threshold || norm < config.vanishing_sigmas * self.norm_error(party)
    }

    fn any_vanishes(&self, config: &ProtocolConfig) -> bool {
        self.vanishes(0, config) || self.vanishes(1, config)
    }
}

/// Filter along the filtering party's Bloch direction when it stands out
/// from the noise, otherwise in its computational basis.
fn filter_for(local: &LocalStage, config: &ProtocolConfig) -> Result<FilterOp> {
    let party = config.filter_party;
    if party > 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: party + 1,
        });
    }
    let v = local.bloch[party];
    let norm = norm3(&v);
    if norm <= TOL.zero || norm < 3.0 * local.norm_error(party) {
        return FilterOp::computational(party, config.epsilon);
    }
    let (b, b_perp) = basis_vectors(bloch_to_basis(v, 0.0)?, PerpConvention::Standard);
    FilterOp::new(party, config.epsilon, [b, b_perp])
}

/// Runs calibration and verification against a two-qubit source.
pub fn run_protocol<S: MeasurementSource + ?Sized>(
    source: &mut S,
    config: &ProtocolConfig,
) -> Result<ProtocolRun> {
    if source.n_qubits() != 2 {
        return Err(Error::UnsupportedDimension(source.n_qubits()));
    }
    let mut transcript = Vec::new();
    let mut local = measure_local(source, Stage::Bloch, &mut transcript)?;

    if local.any_vanishes(config) {
        let op = filter_for(&local, config)?;
        let p = source.filter(&op)?;
        transcript.push(Step::Filter {
            party: op.party,
            epsilon: op.epsilon,
            success_probability: p,
        });
        local = measure_local(source, Stage::FilteredBloch, &mut transcript)?;
        if local.any_vanishes(config) {
            let criterion = CriterionState::new(config.error_multiplier);
            let mut result =
                DetectionResult::from_criterion(Strategy::SchmidtProtocol, transcript, &criterion);
            result.verdict = Verdict::Inconclusive;
            return Ok(ProtocolRun {
                result,
                frame: None,
            });
        }
    }

    let alice = bloch_to_basis(local.bloch[0], 0.0)?;
    let bob = bloch_to_basis(local.bloch[1], 0.0)?;
    let (a, a_perp) = basis_vectors(alice, config.convention);
    let (b, b_perp) = basis_vectors(bob, config.convention);
    let axes = [local_axes(&a, &a_perp), local_axes(&b, &b_perp)];

    let mut criterion = CriterionState::new(config.error_multiplier);
    let mut measure = |labels: &str, criterion: &mut CriterionState, transcript: &mut Vec<Step>| -> Result<CorrelationRecord> {
        let index: CorrelationIndex = labels.parse()?;
        let setting: Vec<Option<[f64; 3]>> = index
            .labels()
            .iter()
            .zip(&axes)
            .map(|(p, ax)| ax.axis(*p))
            .collect();
        let e = source.measure(&setting)?;
        let record = CorrelationRecord {
            index,
            value: e.value,
            stderr: e.stderr,
            shots: e.shots,
        };
        let (next, _) = criterion.add(record.clone())?;
        *criterion = next;
        transcript.push(Step::Measurement {
            stage: Stage::Verification,
            record: record.clone(),
        });
        Ok(record)
    };

    measure("zz", &mut criterion, &mut transcript)?;
    let yy = measure("yy", &mut criterion, &mut transcript)?;

    let cos_phi = match config.phase_policy {
        PhasePolicy::AlwaysExtra => None,
        _ => match relative_phase(yy.value, local.bloch[0]) {
            Ok(c) => Some(c),
            Err(Error::DegenerateDenominator { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    let extra = match config.phase_policy {
        PhasePolicy::AlwaysExtra => true,
        PhasePolicy::Threshold(t) => cos_phi.is_none_or(|c| c.abs() < t),
        PhasePolicy::Saturation => {
            let (w, sigma) = missing_weight(yy.value, yy.stderr, &local.bloch[0], &local.stderr[0]);
            w + 3.0 * sigma > criterion.propagated_error().max(SATURATION_TOL)
        }
    };

    let xy = if extra {
        Some(measure("xy", &mut criterion, &mut transcript)?)
    } else {
        None
    };

    let weight = match (&xy, cos_phi) {
        (Some(xy), _) => Some(yy.value.powi(2) + xy.value.powi(2)),
        (None, Some(c)) if c.abs() >= 1.0 - 1e-9 => Some(yy.value.powi(2)),
        _ => None,
    };
    let theta = weight.map(|w| w.sqrt().clamp(0.0, 1.0).asin() / 2.0);

    let result = DetectionResult::from_criterion(Strategy::SchmidtProtocol, transcript, &criterion);
    Ok(ProtocolRun {
        result,
        frame: Some(SchmidtFrame {
            alice,
            bob,
            cos_relative_phase: cos_phi,
            theta,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{bloch_vector, correlation};
    use crate::source::SimulatedSource;
    use crate::state::{phi_plus, product_state, qubit_along, schmidt_state};
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn bloch_to_basis_examples() {
        let b = bloch_to_basis([0.0, 0.0, 1.0], 0.1).unwrap();
        assert_eq!((b.xi, b.phi), (0.0, 0.0));
        let b = bloch_to_basis([1.0, 0.0, 0.0], 0.1).unwrap();
        assert!((b.xi - FRAC_PI_4).abs() < 1e-15 && b.phi.abs() < 1e-15);
        let b = bloch_to_basis([0.0, 1.0, 0.0], 0.1).unwrap();
        assert!((b.xi - FRAC_PI_4).abs() < 1e-15 && (b.phi - PI / 2.0).abs() < 1e-15);
        let b = bloch_to_basis([0.0, 0.0, -0.3], 0.1).unwrap();
        assert!((b.xi - PI / 2.0).abs() < 1e-15);
        assert!(matches!(
            bloch_to_basis([0.01, 0.0, 0.0], 0.1),
            Err(Error::DegenerateDirection { .. })
        ));
        assert!(bloch_to_basis([0.0; 3], 0.0).is_err());
    }

    #[test]
    fn axes_are_orthonormal_and_z_matches_bloch() {
        for conv in [PerpConvention::Standard, PerpConvention::Rephased] {
            let ang = BasisAngles { xi: 0.4, phi: 2.1 };
            let (a, p) = basis_vectors(ang, conv);
            let overlap: C64 = a.iter().zip(&p).map(|(x, y)| x.conj() * y).sum();
            assert!(overlap.norm() < 1e-15);
            let ax = local_axes(&a, &p);
            let z = basis_to_bloch(ang);
            for k in 0..3 {
                assert!((ax.z[k] - z[k]).abs() < 1e-12);
            }
            let dot = |u: [f64; 3], v: [f64; 3]| u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            assert!(dot(ax.x, ax.y).abs() < 1e-12);
            assert!(dot(ax.x, ax.z).abs() < 1e-12);
            assert!((norm3(&ax.y) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oracle_examples() {
        let zero = qubit_along([0.0, 0.0, 1.0]).unwrap();
        let prod = product_state(&[zero.clone(), qubit_along([1.0, 0.0, 0.0]).unwrap()]).unwrap();
        assert!(schmidt_oracle(&prod).unwrap().theta.abs() < 1e-12);
        assert!((schmidt_oracle(&phi_plus()).unwrap().theta - FRAC_PI_4).abs() < 1e-12);
        let t = PI / 8.0;
        let d = schmidt_oracle(&schmidt_state(t, 0.0)).unwrap();
        assert!((d.theta - t).abs() < 1e-12);
        assert!((d.a[0].norm() - 1.0).abs() < 1e-12);
        assert!((d.b[0].norm() - 1.0).abs() < 1e-12);
        let rebuilt = d.reconstruct();
        let overlap: C64 = rebuilt
            .iter()
            .zip(schmidt_state(t, 0.0).amplitudes())
            .map(|(x, y)| x.conj() * y)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        assert!(schmidt_oracle(&crate::state::w_state()).is_err());
    }

    #[test]
    fn filter_examples() {
        let rho = phi_plus().density();
        let (same, p) = apply_filter(&rho, &FilterOp::computational(1, 1.0).unwrap()).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        assert!(same.matrix().approx_eq(rho.matrix(), 1e-15));

        for eps in [1e-4, 0.2, 0.5, 0.9] {
            let (f, p) = apply_filter(&rho, &FilterOp::computational(1, eps).unwrap()).unwrap();
            assert!((p - (1.0 + eps * eps) / 2.0).abs() < 1e-12);
            let expected = (1.0 - eps * eps) / (1.0 + eps * eps);
            assert!((norm3(&bloch_vector(&f, 0).unwrap()) - expected).abs() < 1e-12);
            let bob = bloch_vector(&f, 1).unwrap();
            assert!(bob[0].abs() < 1e-12 && bob[1].abs() < 1e-12);
            assert!((bob[2] - expected).abs() < 1e-12);
        }
        let (f, _) = apply_filter(&rho, &FilterOp::computational(1, 1e-4).unwrap()).unwrap();
        assert!(bloch_vector(&f, 0).unwrap()[2] > 1.0 - 1e-7);

        let one_one = PureState::basis(2, 0b11).unwrap().density();
        let proj = FilterOp::new(
            1,
            1e-7,
            [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]],
        )
        .unwrap();
        assert!(matches!(apply_filter(&one_one, &proj), Err(Error::ZeroSuccess { .. })));
        assert!(FilterOp::computational(1, 0.0).is_err());
        assert!(FilterOp::computational(1, 1.5).is_err());
        assert!(apply_filter(&rho, &FilterOp::computational(2, 0.5).unwrap()).is_err());
    }

    #[test]
    fn relative_phase_examples() {
        assert_eq!(relative_phase(0.0, [0.0, 0.0, 0.5]).unwrap(), 0.0);

        // cos(π/8)|00⟩ + sin(π/8)|11⟩ in its own computational frames.
        let t = PI / 8.0;
        let rho = schmidt_state(t, 0.0).density();
        let alpha = bloch_vector(&rho, 0).unwrap();
        let ang = bloch_to_basis(alpha, 0.1).unwrap();
        let (a, p) = basis_vectors(ang, PerpConvention::Standard);
        let ax = local_axes(&a, &p);
        let tyy = crate::correlations::directional_correlation(&rho, &[Some(ax.y), Some(ax.y)]).unwrap();
        assert!((relative_phase(tyy, alpha).unwrap().abs() - 1.0).abs() < 1e-12);
        // In the Standard convention σ_y' = σ_y here, so this is plain T_yy.
        assert!((tyy - correlation(&rho, &"yy".parse().unwrap()).unwrap()).abs() < 1e-12);

        let n = 1.0 - 1e-8;
        assert!(matches!(
            relative_phase(0.0, [0.0, 0.0, n]),
            Err(Error::DegenerateDenominator { .. })
        ));
        assert_eq!(relative_phase(0.9, [0.0, 0.0, 0.6]).unwrap(), 1.0);
    }

    #[test]
    fn protocol_on_schmidt_state() {
        let t = PI / 6.0;
        let mut src = SimulatedSource::exact(schmidt_state(t, 0.0).density());
        let run = run_protocol(&mut src, &ProtocolConfig::default()).unwrap();
        assert!(run.result.detected());
        assert!((run.result.sum_of_squares - 1.75).abs() < 1e-12);
        assert_eq!(run.result.measured_labels(), vec!["zz", "yy"]);
        assert!((run.frame.unwrap().theta.unwrap() - t).abs() < 1e-9);
    }

    #[test]
    fn protocol_on_product_state() {
        let a = qubit_along([0.3, -0.5, 0.8]).unwrap();
        let b = qubit_along([-0.9, 0.1, 0.2]).unwrap();
        let mut src = SimulatedSource::exact(product_state(&[a, b]).unwrap().density());
        let run = run_protocol(&mut src, &ProtocolConfig::default()).unwrap();
        assert_eq!(run.result.verdict, Verdict::NotDetected);
        assert!(run.result.sum_of_squares <= 1.0);
    }

    #[test]
    fn protocol_filters_maximally_entangled() {
        let mut src = SimulatedSource::exact(phi_plus().density());
        let run = run_protocol(&mut src, &ProtocolConfig::default()).unwrap();
        assert!(run.result.filtered());
        assert!(run.result.detected());
        // ε = 1/2 gives tan θ' = 1/2, sin 2θ' = 4/5.
        assert!((run.result.sum_of_squares - 1.64).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_inconclusive() {
        let mut src = SimulatedSource::exact(DensityMatrix::maximally_mixed(2).unwrap());
        let run = run_protocol(&mut src, &ProtocolConfig::default()).unwrap();
        assert_eq!(run.result.verdict, Verdict::Inconclusive);
        assert!(run.frame.is_none());
        assert_eq!(run.result.steps, 0);
    }
}
