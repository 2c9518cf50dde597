//! Numerical tolerances shared across the crate.

/// Tolerance record. Every comparison against a numerical zero in the
/// crate reads its threshold from here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entry-wise absolute tolerance for matrix equality.
    pub matrix_eq: f64,
    /// Hermiticity, trace and positivity checks on density matrices.
    pub state: f64,
    /// Residual bound for eigen and singular value decompositions.
    pub decomposition: f64,
    /// Minimum partial-transpose eigenvalue below which a state counts as entangled.
    pub ppt: f64,
    /// Norms and probabilities below this are treated as zero.
    pub zero: f64,
    /// Exact-mode sums must exceed 1 by more than this to count as detected.
    pub criterion: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        matrix_eq: 1e-9,
        state: 1e-9,
        decomposition: 1e-8,
        ppt: 1e-10,
        zero: 1e-12,
        criterion: 1e-12,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

pub const TOL: Tolerances = Tolerances::DEFAULT;

/// Largest supported register (4 qubits, dimension 16).
pub const MAX_QUBITS: usize = 4;
