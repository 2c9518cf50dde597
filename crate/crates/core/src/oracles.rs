//! Reference answers used to validate detection strategies.

use serde::{Deserialize, Serialize};

use crate::correlations::full_tensor;
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::state::DensityMatrix;
use crate::tolerance::TOL;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementVerdict {
    pub entangled: bool,
    pub min_pt_eigenvalue: f64,
}

/// Partial-transpose test on the second party. Exact for two qubits.
pub fn ppt_verdict(rho: &DensityMatrix) -> Result<EntanglementVerdict> {
    if rho.n_qubits() != 2 {
        return Err(Error::UnsupportedDimension(rho.n_qubits()));
    }
    let pt = rho.partial_transpose(1)?;
    let min = hermitian_eigenvalues(&pt)?[0];
    Ok(EntanglementVerdict {
        entangled: min < -TOL.ppt,
        min_pt_eigenvalue: min,
    })
}

/// `Σ T²` over every full correlation and whether it exceeds 1.
pub fn brute_force_criterion(rho: &DensityMatrix) -> Result<(f64, bool)> {
    let sum = full_tensor(rho)?.sum_of_squares();
    Ok((sum, sum > 1.0 + TOL.criterion))
}
