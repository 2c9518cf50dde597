//! Adaptive measurement plans built from the commutation structure of
//! Pauli correlations.
//!
//! A node measures one full correlation. A result with `|T| ≥ threshold`
//! follows the big branch, anything else the small branch. Every node below
//! a big outcome commutes with all big-outcome operators above it: a large
//! value on `A` bounds every operator anti-commuting with `A`, so those are
//! poor candidates for pushing `Σ T²` over 1.
//!
//! Candidates are ranked per party by their cyclic distance from the root
//! label (`z, y, x` for a `z` root), which makes generation equivariant
//! under renaming local axes.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::correlations::{CorrelationRecord, CriterionState, CriterionVerdict};
use crate::detection::{DetectionResult, Stage, Step, Strategy};
use crate::error::{Error, Result};
use crate::pauli::{CorrelationIndex, Pauli};
use crate::source::MeasurementSource;
use crate::tolerance::MAX_QUBITS;

/// Branch taken after a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Big,
    Small,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub index: CorrelationIndex,
    #[serde(default)]
    pub big: Option<Box<TreeNode>>,
    #[serde(default)]
    pub small: Option<Box<TreeNode>>,
}

impl TreeNode {
    pub fn leaf(index: CorrelationIndex) -> Self {
        Self {
            index,
            big: None,
            small: None,
        }
    }

    pub fn child(&self, outcome: Outcome) -> Option<&TreeNode> {
        match outcome {
            Outcome::Big => self.big.as_deref(),
            Outcome::Small => self.small.as_deref(),
        }
    }

    /// Node reached by following `outcomes` from here.
    pub fn descend(&self, outcomes: &[Outcome]) -> Option<&TreeNode> {
        outcomes.iter().try_fold(self, |n, &o| n.child(o))
    }

    pub fn node_count(&self) -> usize {
        1 + self.big.as_ref().map_or(0, |n| n.node_count())
            + self.small.as_ref().map_or(0, |n| n.node_count())
    }

    pub fn depth(&self) -> usize {
        1 + self
            .big
            .as_ref()
            .map_or(0, |n| n.depth())
            .max(self.small.as_ref().map_or(0, |n| n.depth()))
    }

    fn renamed(&self, shifts: &[u8]) -> Self {
        Self {
            index: self.index.renamed(shifts),
            big: self.big.as_ref().map(|n| Box::new(n.renamed(shifts))),
            small: self.small.as_ref().map(|n| Box::new(n.renamed(shifts))),
        }
    }
}

/// Default branching threshold on `|T|`.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Longest generated path.
pub const DEFAULT_MAX_DEPTH: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeFile", into = "TreeFile")]
pub struct DecisionTree {
    n_qubits: usize,
    threshold: f64,
    max_steps: usize,
    root: TreeNode,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_steps: Option<usize>,
    root: TreeNode,
}

impl TryFrom<TreeFile> for DecisionTree {
    type Error = Error;

    fn try_from(f: TreeFile) -> Result<Self> {
        let mut tree = DecisionTree::new(f.root, f.threshold)?;
        if let Some(m) = f.max_steps {
            tree = tree.with_max_steps(m);
        }
        Ok(tree)
    }
}

impl From<DecisionTree> for TreeFile {
    fn from(t: DecisionTree) -> Self {
        let default = 3usize.pow(t.n_qubits as u32);
        TreeFile {
            threshold: t.threshold,
            max_steps: (t.max_steps != default).then_some(t.max_steps),
            root: t.root,
        }
    }
}

impl DecisionTree {
    /// Validates the path invariants; `max_steps` defaults to `3^n`.
    pub fn new(root: TreeNode, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Domain(format!("threshold {threshold} outside [0,1]")));
        }
        let n = root.index.n_parties();
        check_invariants(&root)?;
        Ok(Self {
            n_qubits: n,
            threshold,
            max_steps: 3usize.pow(n as u32),
            root,
        })
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Domain(format!("threshold {threshold} outside [0,1]")));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    /// The same plan with local axes renamed (see [`CorrelationIndex::renamed`]).
    pub fn renamed(&self, shifts: &[u8]) -> Self {
        Self {
            root: self.root.renamed(shifts),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Checks that all indices are full with a common party count, no index
/// repeats along a path, and every node below a big outcome commutes with
/// all big-outcome ancestors.
pub fn check_invariants(root: &TreeNode) -> Result<()> {
    let n = root.index.n_parties();
    fn walk(node: &TreeNode, n: usize, path: &mut Vec<(CorrelationIndex, Outcome)>) -> Result<()> {
        let idx = &node.index;
        if idx.n_parties() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: idx.n_parties(),
            });
        }
        if !idx.is_full() {
            return Err(Error::NonFullCorrelation(idx.to_string()));
        }
        if path.iter().any(|(p, _)| p == idx) {
            return Err(Error::DuplicateIndex(idx.to_string()));
        }
        if let Some((b, _)) = path
            .iter()
            .find(|(p, o)| *o == Outcome::Big && p.anticommutes_unchecked(idx))
        {
            return Err(Error::InvalidState(format!(
                "{idx} follows a big outcome on anti-commuting {b}"
            )));
        }
        for o in [Outcome::Big, Outcome::Small] {
            if let Some(c) = node.child(o) {
                path.push((idx.clone(), o));
                let r = walk(c, n, path);
                path.pop();
                r?;
            }
        }
        Ok(())
    }
    walk(root, n, &mut Vec::new())
}

/// Generation options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TreeOptions {
    /// Defaults to `min(3^n, 9)`.
    pub max_depth: Option<usize>,
    /// Fixed choices keyed by the outcome sequence leading to the node.
    pub overrides: Vec<(Vec<Outcome>, CorrelationIndex)>,
}

pub fn generate_tree(n: usize, root: CorrelationIndex) -> Result<DecisionTree> {
    generate_tree_with(n, root, &TreeOptions::default())
}

pub fn generate_tree_with(n: usize, root: CorrelationIndex, options: &TreeOptions) -> Result<DecisionTree> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::UnsupportedDimension(n));
    }
    if root.n_parties() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: root.n_parties(),
        });
    }
    if !root.is_full() {
        return Err(Error::NonFullCorrelation(root.to_string()));
    }
    let total = 3usize.pow(n as u32);
    let max_depth = options.max_depth.unwrap_or(DEFAULT_MAX_DEPTH).min(total).max(1);
    let gen = Generator {
        root_labels: root.labels().to_vec(),
        all: CorrelationIndex::all_full(n),
        max_depth,
        overrides: &options.overrides,
    };
    let mut path = Vec::new();
    let node = gen.build(root, &mut path, &mut Vec::new());
    DecisionTree::new(node, DEFAULT_THRESHOLD)
}

struct Generator<'a> {
    root_labels: Vec<Pauli>,
    all: Vec<CorrelationIndex>,
    max_depth: usize,
    overrides: &'a [(Vec<Outcome>, CorrelationIndex)],
}

impl Generator<'_> {
    fn rank(&self, idx: &CorrelationIndex) -> Vec<u8> {
        idx.labels()
            .iter()
            .zip(&self.root_labels)
            .map(|(&p, &r)| Pauli::cycle_distance(r, p))
            .collect()
    }

    fn admissible(&self, idx: &CorrelationIndex, path: &[(CorrelationIndex, Outcome)]) -> bool {
        path.iter().all(|(p, o)| p != idx && (*o == Outcome::Small || !p.anticommutes_unchecked(idx)))
    }

    fn choose(&self, path: &[(CorrelationIndex, Outcome)], outcomes: &[Outcome]) -> Option<CorrelationIndex> {
        if let Some((_, idx)) = self.overrides.iter().find(|(k, _)| k.as_slice() == outcomes) {
            return Some(idx.clone());
        }
        let mut candidates: Vec<&CorrelationIndex> =
            self.all.iter().filter(|c| self.admissible(c, path)).collect();
        candidates.sort_by_key(|c| self.rank(c));
        if let Some((parent, Outcome::Small)) = path.last() {
            if let Some(c) = candidates.iter().find(|c| c.anticommutes_unchecked(parent)) {
                return Some((*c).clone());
            }
        }
        candidates.first().map(|c| (*c).clone())
    }

    fn build(
        &self,
        index: CorrelationIndex,
        path: &mut Vec<(CorrelationIndex, Outcome)>,
        outcomes: &mut Vec<Outcome>,
    ) -> TreeNode {
        let mut node = TreeNode::leaf(index.clone());
        if path.len() + 1 >= self.max_depth {
            return node;
        }
        for o in [Outcome::Big, Outcome::Small] {
            path.push((index.clone(), o));
            outcomes.push(o);
            let child = self
                .choose(path, outcomes)
                .map(|c| Box::new(self.build(c, path, outcomes)));
            path.pop();
            outcomes.pop();
            match o {
                Outcome::Big => node.big = child,
                Outcome::Small => node.small = child,
            }
        }
        node
    }
}

/// Two-qubit plan rooted at `zz`.
///
/// Two choices differ from plain generation: after a small `zz` the plan
/// continues with `yy`, and after that a big `yy` leads to `xz`.
pub fn default_tree_2q() -> DecisionTree {
    let idx = |s: &str| s.parse::<CorrelationIndex>().expect("valid label");
    let options = TreeOptions {
        max_depth: None,
        overrides: vec![
            (vec![Outcome::Small], idx("yy")),
            (vec![Outcome::Small, Outcome::Big], idx("xz")),
        ],
    };
    generate_tree_with(2, idx("zz"), &options).expect("valid default tree")
}

/// Canonical plan rooted at `z…z`.
pub fn default_tree(n: usize) -> Result<DecisionTree> {
    if n == 2 {
        return Ok(default_tree_2q());
    }
    generate_tree(n, CorrelationIndex::uniform(Pauli::Z, n))
}

/// `P(idx) = Σ T²` over the measured correlations anti-commuting with `idx`.
pub fn priority(measured: &[CorrelationRecord], idx: &CorrelationIndex) -> f64 {
    measured
        .iter()
        .filter(|r| r.index.n_parties() == idx.n_parties() && r.index.anticommutes_unchecked(idx))
        .map(|r| r.value * r.value)
        .sum()
}

/// `remaining` sorted by ascending priority; ties in index order.
pub fn priority_order(measured: &[CorrelationRecord], remaining: &[CorrelationIndex]) -> Vec<CorrelationIndex> {
    let mut keyed: Vec<(f64, &CorrelationIndex)> =
        remaining.iter().map(|i| (priority(measured, i), i)).collect();
    keyed.sort_by(|a, b| match a.0.total_cmp(&b.0) {
        Ordering::Equal => a.1.cmp(b.1),
        o => o,
    });
    keyed.into_iter().map(|(_, i)| i.clone()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Standard errors subtracted from Σ before comparing with 1.
    pub error_multiplier: f64,
    /// Continue with the priority queue once the tree is exhausted.
    pub augment: bool,
    /// Overrides the tree's step budget.
    pub max_steps: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            error_multiplier: 1.0,
            augment: true,
            max_steps: None,
        }
    }
}

/// Walks the tree against a source, then the priority queue.
pub fn run_tree<S: MeasurementSource + ?Sized>(
    source: &mut S,
    tree: &DecisionTree,
    config: &RunConfig,
) -> Result<DetectionResult> {
    run_tree_after(source, tree, config, Vec::new())
}

/// As [`run_tree`], with earlier steps (e.g. Bloch measurements) prepended
/// to the transcript.
pub fn run_tree_after<S: MeasurementSource + ?Sized>(
    source: &mut S,
    tree: &DecisionTree,
    config: &RunConfig,
    mut transcript: Vec<Step>,
) -> Result<DetectionResult> {
    if source.n_qubits() != tree.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: tree.n_qubits(),
            found: source.n_qubits(),
        });
    }
    let max_steps = config.max_steps.unwrap_or(tree.max_steps());
    let mut criterion = CriterionState::new(config.error_multiplier);
    let mut done = false;

    let mut step = |idx: &CorrelationIndex,
                    stage: Stage,
                    criterion: &mut CriterionState,
                    transcript: &mut Vec<Step>|
     -> Result<(f64, bool)> {
        let rec = source.measure_index(idx)?;
        let value = rec.value;
        let (next, verdict) = criterion.add(rec.clone())?;
        *criterion = next;
        transcript.push(Step::Measurement { stage, record: rec });
        Ok((value, verdict == CriterionVerdict::Detected))
    };

    let mut node = Some(tree.root());
    while let Some(n) = node {
        if criterion.records().len() >= max_steps {
            break;
        }
        let (value, detected) = step(&n.index, Stage::Tree, &mut criterion, &mut transcript)?;
        if detected {
            done = true;
            break;
        }
        node = n.child(if value.abs() >= tree.threshold() {
            Outcome::Big
        } else {
            Outcome::Small
        });
    }

    if !done && config.augment {
        let remaining: Vec<CorrelationIndex> = CorrelationIndex::all_full(tree.n_qubits())
            .into_iter()
            .filter(|i| !criterion.contains(i))
            .collect();
        for idx in priority_order(criterion.records(), &remaining) {
            if criterion.records().len() >= max_steps {
                break;
            }
            let (_, detected) = step(&idx, Stage::Priority, &mut criterion, &mut transcript)?;
            if detected {
                break;
            }
        }
    }

    Ok(DetectionResult::from_criterion(Strategy::DecisionTree, transcript, &criterion))
}

/// Bloch norm component below which an axis is not considered dominant.
pub const DOMINANT_AXIS_MIN: f64 = 0.2;

/// Root index suggested by local Bloch vectors, and the per-party renaming
/// that maps the canonical `z…z` tree onto it.
pub fn starting_index_from_bloch(bloch: &[[f64; 3]]) -> Result<(CorrelationIndex, Vec<u8>)> {
    let labels: Vec<Pauli> = bloch
        .iter()
        .map(|v| {
            let (k, m) = v
                .iter()
                .enumerate()
                .fold((2, 0.0f64), |best, (k, x)| if x.abs() > best.1 { (k, x.abs()) } else { best });
            if m >= DOMINANT_AXIS_MIN {
                Pauli::from_axis_index(k)
            } else {
                Pauli::Z
            }
        })
        .collect();
    let shifts = labels.iter().map(|&p| Pauli::cycle_distance(Pauli::Z, p)).collect();
    Ok((CorrelationIndex::new(labels)?, shifts))
}
