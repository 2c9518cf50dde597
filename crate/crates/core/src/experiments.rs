//! Experiment harness behind the command-line tool.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlations::{bloch_vector, directional_correlation, full_tensor, norm3};
use crate::detection::{DetectionResult, Stage, Step};
use crate::error::{Error, Result};
use crate::io::{load_state, load_tree, StateData};
use crate::oracles::ppt_verdict;
use crate::pauli::{CorrelationIndex, Pauli};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::schmidt::{run_protocol, PhasePolicy, ProtocolConfig, ProtocolRun};
use crate::source::{MeasurementSource, Mode, SimulatedSource};
use crate::state::{
    apply_frame, g_state, make_colored, make_dicke, make_werner, phi_plus, product_state, purity,
    random_frame, random_mixed_from, random_pure, schmidt_state, singlet, w_state, DensityMatrix,
    Ensemble, PureState,
};
use crate::tree::{
    default_tree, generate_tree, run_tree, run_tree_after, starting_index_from_bloch, DecisionTree,
    RunConfig,
};
use crate::tolerance::TOL;

/// A state named on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Werner(f64),
    Colored(f64),
    W,
    G,
    Dicke(usize, usize),
    Bell,
    Singlet,
    /// `|0…0⟩` on `n` qubits.
    Product(usize),
    Schmidt { theta: f64, phase: f64 },
    MaximallyMixed(usize),
    RandomPure { n: usize, seed: u64 },
    RandomMixed { n: usize, seed: u64 },
    File(PathBuf),
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    s.parse::<T>()
        .map_err(|e| Error::Parse(format!("{what} {s:?}: {e}")))
}

fn real(s: &str, what: &str) -> Result<f64> {
    let v: f64 = num(s, what)?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{what} {s:?} is not finite")));
    }
    Ok(v)
}

impl FromStr for StateSpec {
    type Err = Error;

    /// Named constructors such as `werner:0.8`, `dicke:4:2`, `schmidt:0.5:1.2`,
    /// `random-pure:3:17`; anything that is not a known name is a file path.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty state spec".into()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n + 1 {
                Ok(())
            } else {
                Err(Error::Parse(format!("{:?} takes {n} argument(s): {s:?}", parts[0])))
            }
        };
        let spec = match parts[0] {
            "werner" => {
                arity(1)?;
                StateSpec::Werner(real(parts[1], "mixing")?)
            }
            "colored" => {
                arity(1)?;
                StateSpec::Colored(real(parts[1], "mixing")?)
            }
            "w" => {
                arity(0)?;
                StateSpec::W
            }
            "g" => {
                arity(0)?;
                StateSpec::G
            }
            "dicke" => {
                arity(2)?;
                StateSpec::Dicke(num(parts[1], "qubits")?, num(parts[2], "excitations")?)
            }
            "bell" | "phi+" => {
                arity(0)?;
                StateSpec::Bell
            }
            "singlet" => {
                arity(0)?;
                StateSpec::Singlet
            }
            "product" => match parts.len() {
                1 => StateSpec::Product(2),
                2 => StateSpec::Product(num(parts[1], "qubits")?),
                _ => return Err(Error::Parse(format!("malformed spec {s:?}"))),
            },
            "schmidt" => match parts.len() {
                2 => StateSpec::Schmidt {
                    theta: real(parts[1], "angle")?,
                    phase: 0.0,
                },
                3 => StateSpec::Schmidt {
                    theta: real(parts[1], "angle")?,
                    phase: real(parts[2], "phase")?,
                },
                _ => return Err(Error::Parse(format!("malformed spec {s:?}"))),
            },
            "mixed" => {
                arity(1)?;
                StateSpec::MaximallyMixed(num(parts[1], "qubits")?)
            }
            "random-pure" | "random-mixed" => {
                let (n, seed) = match parts.len() {
                    2 => (num(parts[1], "qubits")?, 0),
                    3 => (num(parts[1], "qubits")?, num(parts[2], "seed")?),
                    _ => return Err(Error::Parse(format!("malformed spec {s:?}"))),
                };
                if parts[0] == "random-pure" {
                    StateSpec::RandomPure { n, seed }
                } else {
                    StateSpec::RandomMixed { n, seed }
                }
            }
            _ => StateSpec::File(PathBuf::from(s)),
        };
        Ok(spec)
    }
}

impl StateSpec {
    pub fn build(&self) -> Result<StateData> {
        use StateData::{Mixed, Pure};
        Ok(match self {
            StateSpec::Werner(p) => Mixed(make_werner(*p)?),
            StateSpec::Colored(p) => Mixed(make_colored(*p)?),
            StateSpec::W => Pure(w_state()),
            StateSpec::G => Pure(g_state()),
            StateSpec::Dicke(n, k) => Pure(make_dicke(*n, *k)?),
            StateSpec::Bell => Pure(phi_plus()),
            StateSpec::Singlet => Pure(singlet()),
            StateSpec::Product(n) => {
                if *n == 0 {
                    return Err(Error::UnsupportedDimension(0));
                }
                Pure(product_state(&vec![PureState::basis(1, 0)?; *n])?)
            }
            StateSpec::Schmidt { theta, phase } => Pure(schmidt_state(*theta, *phase)),
            StateSpec::MaximallyMixed(n) => Mixed(DensityMatrix::maximally_mixed(*n)?),
            StateSpec::RandomPure { n, seed } => Pure(random_pure(*n, &mut rng_from_seed(*seed))?),
            StateSpec::RandomMixed { n, seed } => Mixed(random_mixed_from(
                Ensemble::HilbertSchmidt,
                *n,
                &mut rng_from_seed(*seed),
            )?),
            StateSpec::File(path) => load_state(path)?,
        })
    }
}

/// Settings shared by all commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub threshold: f64,
    /// Standard errors subtracted from Σ before comparing with 1.
    pub error_multiplier: f64,
    /// Tree file; the built-in tree when absent.
    pub tree: Option<PathBuf>,
    pub filter_eps: f64,
    /// Rotates the state by random local unitaries drawn from this seed.
    pub frame_seed: Option<u64>,
    pub phase_policy: PhasePolicy,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Exact,
            seed: 0,
            threshold: crate::tree::DEFAULT_THRESHOLD,
            error_multiplier: 1.0,
            tree: None,
            filter_eps: 0.5,
            frame_seed: None,
            phase_policy: PhasePolicy::Saturation,
        }
    }
}

/// Smallest accepted shot count.
pub const MIN_SHOTS: u64 = 100;

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if let Mode::Shots(n) = self.mode {
            if n < MIN_SHOTS {
                return Err(Error::Domain(format!("shot count {n} below {MIN_SHOTS}")));
            }
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Domain(format!("threshold {} outside (0,1)", self.threshold)));
        }
        if !(self.error_multiplier >= 0.0 && self.error_multiplier.is_finite()) {
            return Err(Error::Domain(format!("error multiplier {}", self.error_multiplier)));
        }
        if !(self.filter_eps > 0.0 && self.filter_eps <= 1.0) {
            return Err(Error::Domain(format!("filter strength {} outside (0,1]", self.filter_eps)));
        }
        Ok(())
    }

    fn run_config(&self) -> RunConfig {
        RunConfig {
            error_multiplier: self.error_multiplier,
            ..RunConfig::default()
        }
    }

    fn protocol_config(&self) -> ProtocolConfig {
        ProtocolConfig {
            epsilon: self.filter_eps,
            phase_policy: self.phase_policy,
            error_multiplier: self.error_multiplier,
            ..ProtocolConfig::default()
        }
    }

    /// The state after the optional random frame.
    pub fn prepare(&self, spec: &StateSpec) -> Result<DensityMatrix> {
        let rho = spec.build()?.density();
        match self.frame_seed {
            Some(s) => {
                let frame = random_frame(rho.n_qubits(), &mut rng_from_seed(s))?;
                apply_frame(&rho, &frame)
            }
            None => Ok(rho),
        }
    }
}

/// Measures every party's Bloch vector through the source.
pub fn measure_bloch_vectors<S: MeasurementSource + ?Sized>(
    source: &mut S,
    transcript: &mut Vec<Step>,
) -> Result<Vec<[f64; 3]>> {
    let n = source.n_qubits();
    let mut out = vec![[0.0; 3]; n];
    for (party, v) in out.iter_mut().enumerate() {
        for (k, p) in Pauli::AXES.into_iter().enumerate() {
            let rec = source.measure_index(&CorrelationIndex::local(p, party, n))?;
            v[k] = rec.value;
            transcript.push(Step::Measurement {
                stage: Stage::Bloch,
                record: rec,
            });
        }
    }
    Ok(out)
}

/// Runs the decision tree on a source.
///
/// Without a tree file, three or more qubits first measure the local Bloch
/// vectors and start from the correlation they point to.
pub fn detect_source<S: MeasurementSource + ?Sized>(
    source: &mut S,
    tree: Option<&DecisionTree>,
    threshold: f64,
    config: &RunConfig,
) -> Result<DetectionResult> {
    let n = source.n_qubits();
    if let Some(t) = tree {
        return run_tree(source, &t.clone().with_threshold(threshold)?, config);
    }
    let canonical = default_tree(n)?.with_threshold(threshold)?;
    if n < 3 {
        return run_tree(source, &canonical, config);
    }
    let mut transcript = Vec::new();
    let bloch = measure_bloch_vectors(source, &mut transcript)?;
    let (_, shifts) = starting_index_from_bloch(&bloch)?;
    run_tree_after(source, &canonical.renamed(&shifts), config, transcript)
}

pub fn cmd_detect(spec: &StateSpec, config: &ExperimentConfig) -> Result<DetectionResult> {
    config.validate()?;
    let rho = config.prepare(spec)?;
    let tree = config.tree.as_deref().map(load_tree).transpose()?;
    let mut source = SimulatedSource::new(rho, config.mode, config.seed);
    detect_source(&mut source, tree.as_ref(), config.threshold, &config.run_config())
}

pub fn cmd_schmidt(spec: &StateSpec, config: &ExperimentConfig) -> Result<ProtocolRun> {
    config.validate()?;
    let rho = config.prepare(spec)?;
    if rho.n_qubits() != 2 {
        return Err(Error::UnsupportedDimension(rho.n_qubits()));
    }
    let mut source = SimulatedSource::new(rho, config.mode, config.seed);
    run_protocol(&mut source, &config.protocol_config())
}

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub fraction: f64,
    /// Mean number of correlations measured by runs that detected; empty
    /// when none did.
    pub mean_steps: Option<f64>,
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with header `parameter,fraction,mean_steps,n_samples,seed`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Parse(format!("csv buffer: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Standard error of each row's fraction.
    pub fn binomial_errors(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| (r.fraction * (1.0 - r.fraction) / r.n_samples as f64).sqrt())
            .collect()
    }

    /// Whether fractions never drop between neighbouring rows by more than
    /// `sigmas` combined standard errors.
    pub fn non_decreasing_within(&self, sigmas: f64) -> bool {
        let e = self.binomial_errors();
        self.rows.windows(2).zip(e.windows(2)).all(|(r, e)| {
            r[1].fraction >= r[0].fraction - sigmas * (e[0] * e[0] + e[1] * e[1]).sqrt()
        })
    }
}

/// `0, step, 2·step, …, 1`, rounded to 1e-9.
pub fn unit_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::Domain(format!("grid step {step} outside (0,1]")));
    }
    let n = (1.0 / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((i as f64 * step) * 1e9).round() / 1e9).collect())
}

fn summarize(parameter: f64, seed: u64, runs: &[(bool, usize)]) -> SweepRow {
    let detected: Vec<usize> = runs.iter().filter(|r| r.0).map(|r| r.1).collect();
    SweepRow {
        parameter,
        fraction: detected.len() as f64 / runs.len() as f64,
        mean_steps: (!detected.is_empty())
            .then(|| detected.iter().sum::<usize>() as f64 / detected.len() as f64),
        n_samples: runs.len(),
        seed,
    }
}

/// Werner-state detection across `grid`: one run per point in exact mode,
/// `repetitions` independent runs in shot mode.
pub fn sweep_werner(grid: &[f64], repetitions: usize, config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let tree = config.tree.as_deref().map(load_tree).transpose()?;
    let reps = if config.mode.is_exact() { 1 } else { repetitions.max(1) };
    let rows = grid
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let rho = make_werner(p)?;
            let point_seed = derive_seed(config.seed, i as u64);
            let runs = (0..reps)
                .map(|r| {
                    let mut src = SimulatedSource::with_rng(rho.clone(), config.mode, stream(point_seed, r as u64));
                    let res = detect_source(&mut src, tree.as_ref(), config.threshold, &config.run_config())?;
                    Ok((res.detected(), res.steps))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(summarize(p, config.seed, &runs))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Options for [`sweep_purity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuritySweep {
    pub samples: usize,
    pub bins: usize,
    pub ensemble: Ensemble,
    /// Haar-random pure states added to the sample (they land in the top bin).
    pub pure_samples: usize,
}

impl PuritySweep {
    pub fn new(samples: usize, bins: usize) -> Self {
        Self {
            samples,
            bins,
            ensemble: Ensemble::default(),
            pure_samples: samples / bins.max(1),
        }
    }
}

/// Per-sample outcome of a purity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PuritySample {
    pub purity: f64,
    pub entangled: bool,
    pub detected: bool,
    pub steps: usize,
}

/// Smallest purity of an entangled two-qubit state.
pub const ENTANGLED_PURITY_MIN: f64 = 1.0 / 3.0;

/// Samples random two-qubit states, keeps the entangled ones and bins the
/// tree's detection fraction by purity over `[1/3, 1]`. Empty bins are
/// omitted; `parameter` is the bin centre.
pub fn sweep_purity(options: &PuritySweep, config: &ExperimentConfig) -> Result<SweepResult> {
    let samples = purity_samples(options, config)?;
    Ok(bin_by_purity(&samples, options.bins, config.seed))
}

pub fn purity_samples(options: &PuritySweep, config: &ExperimentConfig) -> Result<Vec<PuritySample>> {
    config.validate()?;
    if options.bins == 0 {
        return Err(Error::Domain("at least one purity bin is required".into()));
    }
    let tree = config.tree.as_deref().map(load_tree).transpose()?;
    let total = options.samples + options.pure_samples;
    (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(config.seed, i as u64);
            let rho = if i < options.samples {
                random_mixed_from(options.ensemble, 2, &mut rng)?
            } else {
                random_pure(2, &mut rng)?.density()
            };
            let p = purity(&rho);
            let entangled = ppt_verdict(&rho)?.entangled;
            let (detected, steps) = if entangled {
                let mut src = SimulatedSource::with_rng(rho, config.mode, rng);
                let r = detect_source(&mut src, tree.as_ref(), config.threshold, &config.run_config())?;
                (r.detected(), r.steps)
            } else {
                (false, 0)
            };
            Ok(PuritySample {
                purity: p,
                entangled,
                detected,
                steps,
            })
        })
        .collect()
}

pub fn bin_by_purity(samples: &[PuritySample], bins: usize, seed: u64) -> SweepResult {
    let width = (1.0 - ENTANGLED_PURITY_MIN) / bins as f64;
    let mut groups: Vec<Vec<(bool, usize)>> = vec![Vec::new(); bins];
    for s in samples.iter().filter(|s| s.entangled) {
        let b = ((s.purity - ENTANGLED_PURITY_MIN) / width).floor().clamp(0.0, (bins - 1) as f64) as usize;
        groups[b].push((s.detected, s.steps));
    }
    let rows = groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(b, g)| summarize(ENTANGLED_PURITY_MIN + (b as f64 + 0.5) * width, seed, g))
        .collect();
    SweepResult { rows }
}

/// How well local Bloch vectors predict a large correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochHeuristicStats {
    pub samples: usize,
    /// Fraction where the correlation along the Bloch directions reaches
    /// `closeness` times the largest `|T|` over all full axis correlations.
    pub directional: f64,
    /// Same with each Bloch direction snapped to its dominant axis.
    pub axis: f64,
}

/// Evaluates the Bloch starting heuristic on random pure states.
pub fn bloch_heuristic_statistic(n_qubits: usize, samples: usize, seed: u64, closeness: f64) -> Result<BlochHeuristicStats> {
    let hits = (0..samples)
        .into_par_iter()
        .map(|i| {
            let rho = random_pure(n_qubits, &mut stream(seed, i as u64))?.density();
            let tensor = full_tensor(&rho)?;
            let max = tensor.max_abs();
            let bloch = (0..n_qubits)
                .map(|q| bloch_vector(&rho, q))
                .collect::<Result<Vec<_>>>()?;
            let setting: Vec<Option<[f64; 3]>> = bloch
                .iter()
                .map(|v| {
                    let n = norm3(v);
                    Some(if n > TOL.zero { v.map(|x| x / n) } else { [0.0, 0.0, 1.0] })
                })
                .collect();
            let along = directional_correlation(&rho, &setting)?.abs();
            let (root, _) = starting_index_from_bloch(&bloch)?;
            let snapped = tensor.get(&root).unwrap_or(0.0).abs();
            Ok((along >= closeness * max, snapped >= closeness * max))
        })
        .collect::<Result<Vec<_>>>()?;
    let frac = |f: fn(&(bool, bool)) -> bool| hits.iter().filter(|h| f(h)).count() as f64 / samples.max(1) as f64;
    Ok(BlochHeuristicStats {
        samples,
        directional: frac(|h| h.0),
        axis: frac(|h| h.1),
    })
}

/// State file contents for a spec.
pub fn state_gen(spec: &StateSpec) -> Result<StateData> {
    spec.build()
}

/// Tree with the given root; the built-in tree for `z…z`.
pub fn tree_gen(n: usize, root: &CorrelationIndex) -> Result<DecisionTree> {
    if *root == CorrelationIndex::uniform(Pauli::Z, n) {
        default_tree(n)
    } else {
        generate_tree(n, root.clone())
    }
}
