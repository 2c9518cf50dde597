//! Outcome of a detection run.

use serde::{Deserialize, Serialize};

use crate::correlations::{CorrelationRecord, CriterionState, CriterionVerdict};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Detected,
    NotDetected,
    /// The strategy ran out of admissible measurements before it could
    /// evaluate the criterion (e.g. Bloch vectors vanish even after filtering).
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    DecisionTree,
    SchmidtProtocol,
}

/// Where in a strategy a measurement was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// Local Bloch vector components.
    Bloch,
    /// Local Bloch vector components after a filter.
    FilteredBloch,
    /// A node of the decision tree.
    Tree,
    /// Fallback after the tree is exhausted, ordered by priority.
    Priority,
    /// Correlation in the calibrated Schmidt frames.
    Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Step {
    Measurement {
        stage: Stage,
        #[serde(flatten)]
        record: CorrelationRecord,
    },
    Filter {
        party: usize,
        epsilon: f64,
        success_probability: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub strategy: Strategy,
    pub transcript: Vec<Step>,
    /// Σ T² over the full correlations in the transcript.
    pub sum_of_squares: f64,
    /// First-order standard error of the sum (zero in exact mode).
    pub sum_error: f64,
    pub verdict: Verdict,
    /// Number of full-correlation measurements.
    pub steps: usize,
}

impl DetectionResult {
    pub(crate) fn from_criterion(
        strategy: Strategy,
        transcript: Vec<Step>,
        criterion: &CriterionState,
    ) -> Self {
        let verdict = match criterion.verdict() {
            CriterionVerdict::Detected => Verdict::Detected,
            CriterionVerdict::Undecided => Verdict::NotDetected,
        };
        Self {
            strategy,
            transcript,
            sum_of_squares: criterion.running_sum(),
            sum_error: criterion.propagated_error(),
            verdict,
            steps: criterion.records().len(),
        }
    }

    pub fn detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }

    /// Full-correlation records in measurement order.
    pub fn correlations(&self) -> impl Iterator<Item = &CorrelationRecord> {
        self.transcript.iter().filter_map(|s| match s {
            Step::Measurement { record, .. } if record.index.is_full() => Some(record),
            _ => None,
        })
    }

    /// Labels of the full correlations, e.g. `["zz", "yy"]`.
    pub fn measured_labels(&self) -> Vec<String> {
        self.correlations().map(|r| r.index.to_string()).collect()
    }

    pub fn filtered(&self) -> bool {
        self.transcript.iter().any(|s| matches!(s, Step::Filter { .. }))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
