use entdetect::correlations::{bloch_vector, correlation, full_tensor, CorrelationRecord};
use entdetect::io::{parse_state, state_to_json, StateData};
use entdetect::linalg::{hermitian_eigenvalues, svd, tensor_product, ComplexMatrix, C64};
use entdetect::oracles::{brute_force_criterion, ppt_verdict};
use entdetect::pauli::{CorrelationIndex, Pauli};
use entdetect::rng::rng_from_seed;
use entdetect::schmidt::{
    apply_filter, basis_to_bloch, basis_vectors, bloch_to_basis, run_protocol, schmidt_oracle, BasisAngles,
    FilterOp, PerpConvention, ProtocolConfig,
};
use entdetect::source::{Mode, SimulatedSource};
use entdetect::state::{
    apply_frame, purity, random_frame, random_mixed, random_pure, random_qubit_unitary, DensityMatrix,
};
use entdetect::tree::{check_invariants, default_tree, generate_tree, priority_order, run_tree, RunConfig};
use proptest::prelude::*;

fn pauli() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn axis() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn index(n: usize) -> impl Strategy<Value = CorrelationIndex> {
    prop::collection::vec(pauli(), n).prop_map(|v| CorrelationIndex::new(v).unwrap())
}

fn full_index(n: usize) -> impl Strategy<Value = CorrelationIndex> {
    prop::collection::vec(axis(), n).prop_map(|v| CorrelationIndex::new(v).unwrap())
}

fn mixed(n: usize, seed: u64) -> DensityMatrix {
    random_mixed(n, &mut rng_from_seed(seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_states_are_valid(seed in any::<u64>(), n in 1usize..=4) {
        let rho = mixed(n, seed);
        prop_assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.matrix().is_hermitian(1e-12));
        prop_assert!(hermitian_eigenvalues(rho.matrix()).unwrap()[0] > -1e-12);
        let p = purity(&rho);
        prop_assert!(p <= 1.0 + 1e-12 && p >= 1.0 / (1usize << n) as f64 - 1e-12);
        prop_assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let (a, b, c, d) = (
            random_qubit_unitary(&mut rng),
            random_qubit_unitary(&mut rng),
            random_qubit_unitary(&mut rng),
            random_qubit_unitary(&mut rng),
        );
        let lhs = &tensor_product(&a, &b) * &tensor_product(&c, &d);
        let rhs = tensor_product(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5) {
        let mut rng = rng_from_seed(seed);
        let data: Vec<C64> = (0..rows * cols)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let m = ComplexMatrix::from_vec(rows, cols, data).unwrap();
        let d = svd(&m);
        prop_assert!(d.reconstruct().approx_eq(&m, 1e-10));
        prop_assert!(d.u.is_unitary(1e-10) && d.v.is_unitary(1e-10));
        prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1] - 1e-15));
    }

    #[test]
    fn correlations_are_bounded(seed in any::<u64>(), idx in index(3)) {
        let t = correlation(&mixed(3, seed), &idx).unwrap();
        prop_assert!(t.abs() <= 1.0);
    }

    #[test]
    fn correlation_matches_trace(seed in any::<u64>(), idx in index(2)) {
        let rho = mixed(2, seed);
        let direct = rho.matrix().trace_product(&idx.operator()).re;
        prop_assert!((correlation(&rho, &idx).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn anticommutation_matches_matrices(a in index(3), b in index(3)) {
        let (pa, pb) = (a.operator(), b.operator());
        let anti = &(&pa * &pb) + &(&pb * &pa);
        let zero = anti.frobenius_norm() < 1e-12;
        prop_assert_eq!(a.anticommutes(&b).unwrap(), zero);
        prop_assert_eq!(a.anticommutes(&b).unwrap(), b.anticommutes(&a).unwrap());
    }

    #[test]
    fn complementarity(seed in any::<u64>(), order in prop::collection::vec(0usize..63, 1..40)) {
        let rho = mixed(3, seed);
        let mut set: Vec<CorrelationIndex> = Vec::new();
        for k in order {
            let k = k + 1;
            let labels = (0..3).map(|q| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][(k >> (2 * q)) & 3]).collect();
            let c = CorrelationIndex::new(labels).unwrap();
            if set.iter().all(|s| s.anticommutes(&c).unwrap()) {
                set.push(c);
            }
        }
        let sum: f64 = set.iter().map(|i| correlation(&rho, i).unwrap().powi(2)).sum();
        prop_assert!(sum <= 1.0 + 1e-9, "sum {}", sum);
    }

    #[test]
    fn pure_state_full_tensor(seed in any::<u64>()) {
        let psi = random_pure(2, &mut rng_from_seed(seed)).unwrap();
        let theta = schmidt_oracle(&psi).unwrap().theta;
        let sum = full_tensor(&psi.density()).unwrap().sum_of_squares();
        prop_assert!((sum - (1.0 + 2.0 * (2.0 * theta).sin().powi(2))).abs() < 1e-9);
    }

    #[test]
    fn schmidt_oracle_reconstructs(seed in any::<u64>()) {
        let psi = random_pure(2, &mut rng_from_seed(seed)).unwrap();
        let d = schmidt_oracle(&psi).unwrap();
        prop_assert!(d.theta >= 0.0 && d.theta <= std::f64::consts::FRAC_PI_4 + 1e-12);
        let overlap: C64 = d.reconstruct().iter().zip(psi.amplitudes()).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((overlap.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bloch_basis_round_trip(xi in 0.0f64..std::f64::consts::FRAC_PI_2, phi in 0.0f64..std::f64::consts::TAU) {
        let dir = basis_to_bloch(BasisAngles { xi, phi });
        let back = basis_to_bloch(bloch_to_basis(dir, 0.1).unwrap());
        for k in 0..3 {
            prop_assert!((dir[k] - back[k]).abs() < 1e-9);
        }
        for conv in [PerpConvention::Standard, PerpConvention::Rephased] {
            let (a, p) = basis_vectors(BasisAngles { xi, phi }, conv);
            let overlap: C64 = a.iter().zip(&p).map(|(x, y)| x.conj() * y).sum();
            prop_assert!(overlap.norm() < 1e-9);
            let rho = DensityMatrix::new(ComplexMatrix::outer(&a)).unwrap();
            let b = bloch_vector(&rho, 0).unwrap();
            for k in 0..3 {
                prop_assert!((b[k] - dir[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn filter_output_is_a_state(seed in any::<u64>(), eps in 0.01f64..=1.0, party in 0usize..2) {
        let rho = mixed(2, seed);
        let (out, p) = apply_filter(&rho, &FilterOp::computational(party, eps).unwrap()).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!(DensityMatrix::new(out.matrix().clone()).is_ok());
    }

    #[test]
    fn protocol_is_convention_independent(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let psi = random_pure(2, &mut rng).unwrap();
        prop_assume!(schmidt_oracle(&psi).unwrap().theta > 0.05);
        let rho = psi.density();
        let sums: Vec<f64> = [PerpConvention::Standard, PerpConvention::Rephased]
            .into_iter()
            .map(|convention| {
                let cfg = ProtocolConfig { convention, ..ProtocolConfig::default() };
                run_protocol(&mut SimulatedSource::exact(rho.clone()), &cfg).unwrap().result.sum_of_squares
            })
            .collect();
        prop_assert!((sums[0] - sums[1]).abs() < 1e-9);
    }

    #[test]
    fn generated_trees_are_valid(root in full_index(2), root3 in full_index(3)) {
        let t = generate_tree(2, root.clone()).unwrap();
        check_invariants(t.root()).unwrap();
        prop_assert_eq!(&t.root().index, &root);
        let t3 = generate_tree(3, root3).unwrap();
        check_invariants(t3.root()).unwrap();
        prop_assert!(t3.root().depth() <= 9);
    }

    #[test]
    fn tree_runs_are_sound(seed in any::<u64>(), n in 2usize..=3) {
        let rho = mixed(n, seed);
        let tree = default_tree(n).unwrap();
        let r = run_tree(&mut SimulatedSource::exact(rho.clone()), &tree, &RunConfig::default()).unwrap();
        let labels = r.measured_labels();
        let mut unique = labels.clone();
        unique.sort();
        unique.dedup();
        prop_assert_eq!(unique.len(), labels.len());
        prop_assert!(r.steps <= tree.max_steps());
        if r.detected() {
            prop_assert!(r.sum_of_squares > 1.0);
            prop_assert!(brute_force_criterion(&rho).unwrap().1);
            if n == 2 {
                prop_assert!(ppt_verdict(&rho).unwrap().entangled);
            }
        } else {
            prop_assert_eq!(r.steps, tree.max_steps());
        }
    }

    #[test]
    fn shot_runs_are_deterministic(seed in any::<u64>()) {
        let rho = mixed(2, seed);
        let tree = default_tree(2).unwrap();
        let run = || run_tree(&mut SimulatedSource::new(rho.clone(), Mode::Shots(500), seed), &tree, &RunConfig::default()).unwrap();
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn priority_order_is_sorted(seed in any::<u64>()) {
        let rho = mixed(2, seed);
        let all = CorrelationIndex::all_full(2);
        let measured: Vec<CorrelationRecord> = all[..3]
            .iter()
            .map(|i| CorrelationRecord::exact(i.clone(), correlation(&rho, i).unwrap()))
            .collect();
        let order = priority_order(&measured, &all[3..]);
        prop_assert_eq!(order.len(), 6);
        let p: Vec<f64> = order.iter().map(|i| entdetect::tree::priority(&measured, i)).collect();
        prop_assert!(p.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn state_files_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let mixed_state = StateData::Mixed(mixed(n, seed));
        prop_assert_eq!(parse_state(state_to_json(&mixed_state).unwrap().as_bytes()).unwrap(), mixed_state);
        let pure = StateData::Pure(random_pure(n, &mut rng_from_seed(seed)).unwrap());
        prop_assert_eq!(parse_state(state_to_json(&pure).unwrap().as_bytes()).unwrap(), pure);
    }

    #[test]
    fn frames_preserve_spectrum(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let rho = random_mixed(2, &mut rng).unwrap();
        let frame = random_frame(2, &mut rng).unwrap();
        let turned = apply_frame(&rho, &frame).unwrap();
        let a = hermitian_eigenvalues(rho.matrix()).unwrap();
        let b = hermitian_eigenvalues(turned.matrix()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
        prop_assert_eq!(ppt_verdict(&rho).unwrap().entangled, ppt_verdict(&turned).unwrap().entangled);
    }
}

#[test]
fn pure_states_detected_iff_entangled() {
    let mut rng = rng_from_seed(5);
    for _ in 0..2000 {
        let psi = random_pure(2, &mut rng).unwrap();
        let theta = schmidt_oracle(&psi).unwrap().theta;
        let rho = psi.density();
        let (_, detected) = brute_force_criterion(&rho).unwrap();
        let entangled = ppt_verdict(&rho).unwrap().entangled;
        assert_eq!(detected, entangled);
        assert_eq!(entangled, theta > 1e-6);
    }
}

#[test]
fn criterion_is_sufficient_for_mixed_states() {
    let mut rng = rng_from_seed(6);
    for _ in 0..5000 {
        let rho = random_mixed(2, &mut rng).unwrap();
        if brute_force_criterion(&rho).unwrap().1 {
            assert!(ppt_verdict(&rho).unwrap().entangled);
        }
    }
}
