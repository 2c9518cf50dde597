use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entdetect::experiments::{
    cmd_detect, cmd_schmidt, state_gen, sweep_purity, sweep_werner, tree_gen, unit_grid, ExperimentConfig,
    PuritySweep, StateSpec, SweepResult,
};
use entdetect::io::{state_to_json, write_file};
use entdetect::schmidt::PhasePolicy;
use entdetect::state::Ensemble;
use entdetect::{CorrelationIndex, DetectionResult, Error, Mode, Result};

#[derive(Parser, Debug)]
#[command(name = "entdetect", version, about = "Adaptive entanglement detection from Pauli correlations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the decision tree on a named state or a state file.
    Detect {
        spec: StateSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Run the Schmidt-basis protocol on a two-qubit state.
    Schmidt {
        spec: StateSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Detection across Werner states on a uniform grid over [0, 1].
    SweepWerner {
        #[arg(long, default_value_t = 0.005)]
        step: f64,
        /// Runs per grid point in shot mode.
        #[arg(long, default_value_t = 200)]
        repetitions: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Detection fraction of entangled random states, binned by purity.
    SweepPurity {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// hs, mixed-rank or induced:K
        #[arg(long, default_value = "hs")]
        ensemble: Ensemble,
        /// Pure states added on top of the mixed sample (default samples/bins).
        #[arg(long)]
        pure_samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a state file.
    StateGen {
        spec: StateSpec,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a decision tree file.
    TreeGen {
        n_qubits: usize,
        root: CorrelationIndex,
        #[arg(long, default_value_t = entdetect::tree::DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// exact, shots or shots=N
    #[arg(long, default_value = "exact")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = entdetect::tree::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Standard errors subtracted from the sum before comparing with 1.
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long)]
    tree: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    filter_eps: f64,
    /// Rotate the state by random local unitaries from this seed.
    #[arg(long)]
    frame_seed: Option<u64>,
    /// saturation, always or threshold=C
    #[arg(long, default_value = "saturation", value_parser = parse_phase_policy)]
    phase_policy: PhasePolicy,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

fn parse_phase_policy(s: &str) -> std::result::Result<PhasePolicy, String> {
    match s {
        "saturation" => Ok(PhasePolicy::Saturation),
        "always" => Ok(PhasePolicy::AlwaysExtra),
        _ => s
            .strip_prefix("threshold=")
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| (0.0..=1.0).contains(v))
            .map(PhasePolicy::Threshold)
            .ok_or_else(|| format!("unknown phase policy {s:?}")),
    }
}

impl Common {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            mode: self.mode,
            seed: self.seed,
            threshold: self.threshold,
            error_multiplier: self.k,
            tree: self.tree.clone(),
            filter_eps: self.filter_eps,
            frame_seed: self.frame_seed,
            phase_policy: self.phase_policy,
        }
    }

    fn emit(&self, text: &str) -> Result<()> {
        emit_or_print(self.out.as_ref(), text)
    }

    fn json_only(&self) -> Result<()> {
        match self.format {
            Some(Format::Csv) => Err(Error::Domain("this command only writes json".into())),
            _ => Ok(()),
        }
    }

    fn emit_sweep(&self, sweep: &SweepResult) -> Result<()> {
        match self.format.unwrap_or(Format::Csv) {
            Format::Csv => self.emit(&sweep.to_csv()?),
            Format::Json => self.emit(&sweep.to_json()?),
        }
    }
}

fn summary(result: &DetectionResult) -> String {
    let labels: Vec<String> = result.measured_labels().iter().map(|l| l.to_string()).collect();
    format!(
        "{:?}: sum {:.6} ± {:.6} after {} correlations [{}]",
        result.verdict,
        result.sum_of_squares,
        result.sum_error,
        result.steps,
        labels.join(", ")
    )
}

fn emit_or_print(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{}", text.trim_end()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect { spec, common } => {
            common.json_only()?;
            let result = cmd_detect(&spec, &common.config())?;
            eprintln!("{}", summary(&result));
            common.emit(&result.to_json()?)
        }
        Command::Schmidt { spec, common } => {
            common.json_only()?;
            let run = cmd_schmidt(&spec, &common.config())?;
            eprintln!("{}", summary(&run.result));
            if let Some(theta) = run.frame.as_ref().and_then(|f| f.theta) {
                eprintln!("schmidt angle estimate {theta:.6}");
            }
            common.emit(&serde_json::to_string_pretty(&run).map_err(Error::from)?)
        }
        Command::SweepWerner { step, repetitions, common } => {
            let sweep = sweep_werner(&unit_grid(step)?, repetitions, &common.config())?;
            common.emit_sweep(&sweep)
        }
        Command::SweepPurity { samples, bins, ensemble, pure_samples, common } => {
            if samples < 1000 {
                return Err(Error::Domain(format!("at least 1000 samples required, got {samples}")));
            }
            let mut options = PuritySweep::new(samples, bins);
            options.ensemble = ensemble;
            if let Some(p) = pure_samples {
                options.pure_samples = p;
            }
            let sweep = sweep_purity(&options, &common.config())?;
            common.emit_sweep(&sweep)
        }
        Command::StateGen { spec, out } => emit_or_print(out.as_ref(), &state_to_json(&state_gen(&spec)?)?),
        Command::TreeGen { n_qubits, root, threshold, out } => {
            let tree = tree_gen(n_qubits, &root)?.with_threshold(threshold)?;
            emit_or_print(out.as_ref(), &tree.to_json()?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
