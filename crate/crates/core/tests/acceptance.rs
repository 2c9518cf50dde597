//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use entdetect::correlations::{correlation, full_tensor};
use entdetect::experiments::{
    bloch_heuristic_statistic, cmd_detect, sweep_purity, sweep_werner, unit_grid, ExperimentConfig,
    PuritySweep, StateSpec,
};
use entdetect::linalg::hermitian_eigen;
use entdetect::oracles::ppt_verdict;
use entdetect::pauli::{CorrelationIndex, Pauli};
use entdetect::rng::stream;
use entdetect::schmidt::{run_protocol, schmidt_oracle, ProtocolConfig};
use entdetect::source::{Mode, SimulatedSource};
use entdetect::state::{
    apply_frame, make_colored, random_frame, random_mixed, random_mixed_from, random_pure,
    DensityMatrix, Ensemble, PureState,
};
use entdetect::tree::{default_tree_2q, priority, priority_order, run_tree, RunConfig};
use entdetect::CorrelationRecord;
use rand::seq::SliceRandom;
use rand::Rng;

const SEED: u64 = 2011;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = out.pass && in_time;
    let limit_note = limit.map_or(String::new(), |l| format!(", limit {:.0?}", l));
    println!(
        "[{}] {id:>2} {name}: {} ({:.2?}{limit_note})",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed
    );
    pass
}

fn idx(s: &str) -> CorrelationIndex {
    s.parse().unwrap()
}

/// Pure state with the largest weight in `rho`.
fn dominant_vector(rho: &DensityMatrix) -> PureState {
    let e = hermitian_eigen(rho.matrix()).unwrap();
    let last = e.values.len() - 1;
    PureState::normalized(e.vectors.col(last)).unwrap()
}

fn werner_threshold() -> Outcome {
    let grid = unit_grid(0.005).unwrap();
    let r = sweep_werner(&grid, 1, &ExperimentConfig::default()).unwrap();
    let first = r.rows.iter().position(|row| row.fraction == 1.0);
    let monotone = first.is_some_and(|f| r.rows.iter().enumerate().all(|(i, row)| (row.fraction == 1.0) == (i >= f)));
    match first {
        Some(f) if f > 0 => {
            let (lo, hi) = (r.rows[f - 1].parameter, r.rows[f].parameter);
            Outcome {
                pass: monotone && lo >= 0.575 - 1e-12 && hi <= 0.580 + 1e-12,
                detail: format!("flips between p={lo} and p={hi}, monotone={monotone}"),
            }
        }
        _ => Outcome {
            pass: false,
            detail: "no flip found".into(),
        },
    }
}

fn colored_noise() -> Outcome {
    let tree = default_tree_2q();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for k in 1..=19 {
        let p = k as f64 * 0.05;
        let mut src = SimulatedSource::exact(make_colored(p).unwrap());
        let r = run_tree(&mut src, &tree, &RunConfig::default()).unwrap();
        let err = (r.sum_of_squares - (1.0 + p * p)).abs();
        worst = worst.max(err);
        ok &= r.detected() && r.steps == 2 && err <= 1e-9;
    }
    Outcome {
        pass: ok,
        detail: format!("19 values, all in 2 steps={ok}, max |Σ-(1+p²)|={worst:.1e}"),
    }
}

fn pure_completeness() -> Outcome {
    let tree = default_tree_2q();
    let target = 10_000;
    let mut rng = stream(SEED, 3);
    let mut failures = 0;
    let mut max_steps = 0;
    let mut count = 0;
    while count < target {
        let psi = random_pure(2, &mut rng).unwrap();
        if schmidt_oracle(&psi).unwrap().theta <= 0.01 {
            continue;
        }
        count += 1;
        let frame = random_frame(2, &mut rng).unwrap();
        let rho = apply_frame(&psi.density(), &frame).unwrap();
        let r = run_tree(&mut SimulatedSource::exact(rho), &tree, &RunConfig::default()).unwrap();
        max_steps = max_steps.max(r.steps);
        if !(r.detected() && r.steps <= 9) {
            failures += 1;
        }
    }
    Outcome {
        pass: failures == 0,
        detail: format!("{count} states, {failures} undetected, max steps {max_steps}"),
    }
}

fn schmidt_identity() -> Outcome {
    let n = 1000;
    let config = ProtocolConfig::default();
    let mut rng = stream(SEED, 4);
    let mut worst_exact: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut undetected = 0;
    let mut count = 0;
    while count < n {
        let psi = random_pure(2, &mut rng).unwrap();
        if schmidt_oracle(&psi).unwrap().theta < 0.05 {
            continue;
        }
        count += 1;
        let frame = random_frame(2, &mut rng).unwrap();
        let rho = apply_frame(&psi.density(), &frame).unwrap();

        let mut src = SimulatedSource::exact(rho.clone());
        let run = run_protocol(&mut src, &config).unwrap();
        let expected = schmidt_oracle(&dominant_vector(src.state())).unwrap().verification_sum();
        worst_exact = worst_exact.max((run.result.sum_of_squares - expected).abs());
        if !run.result.detected() {
            undetected += 1;
        }

        let mut src = SimulatedSource::with_rng(rho, Mode::Shots(4500), stream(SEED, 1_000_000 + count as u64));
        let run = run_protocol(&mut src, &config).unwrap();
        let expected = schmidt_oracle(&dominant_vector(src.state())).unwrap().verification_sum();
        let dev = (run.result.sum_of_squares - expected).abs();
        let sigmas = if run.result.sum_error > 0.0 {
            dev / run.result.sum_error
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst_sigma = worst_sigma.max(sigmas);
    }
    Outcome {
        pass: worst_exact <= 1e-6 && worst_sigma <= 5.0 && undetected == 0,
        detail: format!(
            "{count} states, exact max dev {worst_exact:.1e}, undetected {undetected}, shots max dev {worst_sigma:.2} sigma"
        ),
    }
}

fn priority_example() -> Outcome {
    let measured = vec![
        CorrelationRecord::exact(idx("zz"), 0.7),
        CorrelationRecord::exact(idx("xx"), 0.1),
        CorrelationRecord::exact(idx("yy"), 0.4),
    ];
    let expected = [("xy", 0.17), ("yx", 0.17), ("xz", 0.5), ("zx", 0.5), ("yz", 0.65), ("zy", 0.65)];
    let values_ok = expected
        .iter()
        .all(|(s, v)| (priority(&measured, &idx(s)) - v).abs() <= 1e-12);
    let remaining: Vec<_> = ["zy", "zx", "yz", "yx", "xz", "xy"].iter().map(|s| idx(s)).collect();
    let order: Vec<String> = priority_order(&measured, &remaining).iter().map(|i| i.to_string()).collect();
    let order_ok = order == ["xy", "yx", "xz", "zx", "yz", "zy"];
    Outcome {
        pass: values_ok && order_ok,
        detail: format!("values match={values_ok}, order {}", order.join(" ")),
    }
}

fn three_qubit_demos() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, labels) in [(StateSpec::G, ["xxx", "xzz"]), (StateSpec::W, ["zzz", "zyy"])] {
        let r = cmd_detect(&spec, &ExperimentConfig::default()).unwrap();
        let tensor = full_tensor(&spec.build().unwrap().density()).unwrap();
        let oracle_sum: f64 = labels.iter().map(|l| tensor.get(&idx(l)).unwrap().powi(2)).sum();
        let values_match = r
            .correlations()
            .all(|c| (c.value - tensor.get(&c.index).unwrap()).abs() <= 1e-12);
        let ok = r.detected()
            && r.measured_labels() == labels
            && values_match
            && (r.sum_of_squares - oracle_sum).abs() <= 1e-12
            && oracle_sum > 1.0;
        pass &= ok;
        parts.push(format!("{spec:?}: {} Σ={:.6}", r.measured_labels().join(","), r.sum_of_squares));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn soundness() -> Outcome {
    let tree = default_tree_2q();
    let mut rng = stream(SEED, 7);
    let (mut bad, mut entangled, mut detected) = (0, 0, 0);
    for _ in 0..10_000 {
        let rho = random_mixed(2, &mut rng).unwrap();
        let v = ppt_verdict(&rho).unwrap();
        let r = run_tree(&mut SimulatedSource::exact(rho), &tree, &RunConfig::default()).unwrap();
        entangled += v.entangled as usize;
        detected += r.detected() as usize;
        if r.detected() && !v.entangled {
            bad += 1;
        }
    }
    Outcome {
        pass: bad == 0,
        detail: format!("10000 states, {entangled} entangled, {detected} detected, {bad} detected but separable"),
    }
}

fn random_anticommuting_set<R: Rng>(n: usize, rng: &mut R) -> Vec<CorrelationIndex> {
    let labels = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut all: Vec<CorrelationIndex> = (1..4usize.pow(n as u32))
        .map(|mut k| {
            let mut v = Vec::with_capacity(n);
            for _ in 0..n {
                v.push(labels[k % 4]);
                k /= 4;
            }
            CorrelationIndex::new(v).unwrap()
        })
        .collect();
    all.shuffle(rng);
    let mut set: Vec<CorrelationIndex> = Vec::new();
    for c in all {
        if set.iter().all(|s| s.anticommutes(&c).unwrap()) {
            set.push(c);
        }
    }
    set
}

fn complementarity() -> Outcome {
    let mut rng = stream(SEED, 8);
    let mut worst = f64::NEG_INFINITY;
    let mut largest_set = 0;
    let sets: Vec<Vec<CorrelationIndex>> = (0..100)
        .map(|i| random_anticommuting_set(if i % 2 == 0 { 2 } else { 3 }, &mut rng))
        .collect();
    for s in 0..1000 {
        let n = if s % 2 == 0 { 2 } else { 3 };
        let rho = if s % 4 < 2 {
            random_mixed_from(Ensemble::HilbertSchmidt, n, &mut rng).unwrap()
        } else {
            random_pure(n, &mut rng).unwrap().density()
        };
        for set in sets.iter().filter(|set| set[0].n_parties() == n) {
            largest_set = largest_set.max(set.len());
            let sum: f64 = set.iter().map(|i| correlation(&rho, i).unwrap().powi(2)).sum();
            worst = worst.max(sum);
        }
    }
    Outcome {
        pass: worst <= 1.0 + 1e-9,
        detail: format!("1000 states x 50 sets each, largest set {largest_set}, max Σ={worst:.12}"),
    }
}

fn bloch_heuristic() -> Outcome {
    let s = bloch_heuristic_statistic(3, 1000, SEED, 0.9).unwrap();
    Outcome {
        pass: s.directional >= 0.8,
        detail: format!(
            "fraction within 0.9 of max |T|: {:.3} (axis-snapped start: {:.3})",
            s.directional, s.axis
        ),
    }
}

fn purity_curve() -> Outcome {
    let config = ExperimentConfig {
        seed: SEED,
        ..ExperimentConfig::default()
    };
    let options = PuritySweep {
        ensemble: Ensemble::MixedRank,
        ..PuritySweep::new(20_000, 8)
    };
    let r = sweep_purity(&options, &config).unwrap();
    let monotone = r.non_decreasing_within(2.0);
    let fractions: Vec<String> = r.rows.iter().map(|row| format!("{:.3}", row.fraction)).collect();
    Outcome {
        pass: r.rows.len() >= 8 && monotone,
        detail: format!("{} bins, fractions [{}], monotone within 2σ={monotone}", r.rows.len(), fractions.join(" ")),
    }
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        check(1, "werner threshold", Some(s(5)), werner_threshold),
        check(2, "colored noise in two steps", Some(s(1)), colored_noise),
        check(3, "pure-state completeness", Some(s(60)), pure_completeness),
        check(4, "schmidt verification identity", Some(s(60)), schmidt_identity),
        check(5, "priority worked example", None, priority_example),
        check(6, "three-qubit demos", Some(s(1)), three_qubit_demos),
        check(7, "soundness against PPT", Some(s(120)), soundness),
        check(8, "complementarity", None, complementarity),
        check(9, "bloch starting heuristic", None, bloch_heuristic),
        check(10, "efficiency grows with purity", None, purity_curve),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, &ok)| !ok)
        .map(|(i, _)| i + 1)
        .collect();
    if failed.is_empty() {
        println!("acceptance: all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed checks {failed:?}");
        ExitCode::FAILURE
    }
}
