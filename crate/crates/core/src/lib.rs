//! Entanglement detection from few Pauli correlation measurements.
//!
//! A state whose full correlations satisfy `Σ T² > 1` is entangled. The
//! crate simulates qubit registers of up to four qubits and provides two
//! adaptive strategies that try to cross that bound with as few
//! measurements as possible:
//!
//! * [`tree`]: a decision tree that picks the next correlation from the
//!   size of the last result, followed by a priority queue.
//! * [`schmidt`]: local Bloch vectors fix the Schmidt bases of a two-qubit
//!   state, after which two correlations suffice for pure states.
//!
//! Strategies only see a [`source::MeasurementSource`]; the simulator
//! behind it is [`source::SimulatedSource`].

pub mod correlations;
pub mod detection;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod oracles;
pub mod pauli;
pub mod rng;
pub mod schmidt;
pub mod source;
pub mod state;
pub mod tolerance;
pub mod tree;

pub use correlations::{correlation, full_tensor, CorrelationRecord, CriterionState};
pub use detection::{DetectionResult, Verdict};
pub use error::{Error, Result};
pub use pauli::{CorrelationIndex, Pauli};
pub use source::{MeasurementSource, Mode, SimulatedSource};
pub use state::{DensityMatrix, PureState};
pub use tree::{default_tree, run_tree, DecisionTree};
