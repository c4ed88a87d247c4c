use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qcausal::bell::{check_parameter_independence, make_phi_plus, quantum_joint, BellScenario, LhvModel};
use qcausal::causal::{stability_report, CausalModel};
use qcausal::cli::report::format_csv_number;
use qcausal::linalg::{
    commutator, hermitian_eigensystem, tensor_product, trace_norm_distance, ComplexMatrix,
};
use qcausal::quantum::{
    born_probability, conditional_probability, outcome_distribution, update_state, DensityOperator, Given,
    Target,
};
use qcausal::sampling::{ginibre, random_hermitian, random_measurement_model, random_projective_model, random_state};
use qcausal::spacetime::{in_backward_lightcone, interval_type, Event};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
    a.approx_eq(b, tol)
}

fn small_event() -> impl Strategy<Value = Event> {
    (-6i32..6, -6i32..6).prop_map(|(t, x)| Event::at(t as f64, x as f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_product_is_associative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = ginibre(&mut r, 2, 2);
        let b = ginibre(&mut r, 3, 3);
        let c = ginibre(&mut r, 2, 2);
        let left = tensor_product(&tensor_product(&a, &b), &c);
        let right = tensor_product(&a, &tensor_product(&b, &c));
        prop_assert!(close(&left, &right, 1e-12));
    }

    #[test]
    fn partial_trace_of_product_recovers_factors(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_state(&mut r, vec![2]);
        let b = random_state(&mut r, vec![3]);
        let ab = DensityOperator::product(&[&a, &b]);
        prop_assert!(close(ab.reduced(&[0]).unwrap().matrix(), a.matrix(), 1e-12));
        prop_assert!(close(ab.reduced(&[1]).unwrap().matrix(), b.matrix(), 1e-12));
    }

    #[test]
    fn commutator_is_antisymmetric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = ginibre(&mut r, 3, 3);
        let b = ginibre(&mut r, 3, 3);
        let ab = commutator(&a, &b).unwrap();
        let ba = commutator(&b, &a).unwrap();
        prop_assert!(close(&ab, &-&ba, 1e-12));
    }

    #[test]
    fn eigensystem_projectors_resolve_the_matrix(seed in any::<u64>(), dim in 1usize..5) {
        let mut r = rng(seed);
        let h = random_hermitian(&mut r, dim);
        let es = hermitian_eigensystem(&h).unwrap();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, p) in es.projectors.iter().enumerate() {
            prop_assert!(close(&(p * p), p, 1e-10));
            prop_assert!(p.is_hermitian(1e-10));
            for q in &es.projectors[i + 1..] {
                prop_assert!((p * q).max_abs() < 1e-10);
            }
            sum = &sum + p;
        }
        prop_assert!(close(&sum, &ComplexMatrix::identity(dim), 1e-10));
        prop_assert!(close(&es.reconstruct(), &h, 1e-10));
        prop_assert!(es.eigenvalues.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trace_distance_is_a_metric(seed in any::<u64>()) {
        let mut r = rng(seed);
        let [a, b, c] = [(); 3].map(|_| random_state(&mut r, vec![2, 2]));
        let d = |x: &DensityOperator, y: &DensityOperator| trace_norm_distance(x.matrix(), y.matrix()).unwrap();
        prop_assert!((d(&a, &b) - d(&b, &a)).abs() < 1e-12);
        prop_assert!(d(&a, &a) < 1e-12);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
        prop_assert!(d(&a, &b) <= 2.0 + 1e-12);
    }

    #[test]
    fn interval_is_symmetric(e in small_event(), f in small_event()) {
        prop_assert_eq!(e.interval_squared(&f).unwrap(), f.interval_squared(&e).unwrap());
        prop_assert_eq!(interval_type(&e, &f).unwrap(), interval_type(&f, &e).unwrap());
    }

    #[test]
    fn causal_precedence_is_transitive(e in small_event(), f in small_event(), g in small_event()) {
        if in_backward_lightcone(&e, &f) && in_backward_lightcone(&f, &g) {
            prop_assert!(in_backward_lightcone(&e, &g));
        }
    }

    #[test]
    fn update_yields_a_state_and_projective_updates_are_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_state(&mut r, vec![2, 3]);
        let model = random_projective_model(&mut r, 3, Target::Subsystem(1)).unwrap();
        let probs = outcome_distribution(&rho, &model).unwrap();
        let k = (0..probs.len()).max_by(|&i, &j| probs[i].total_cmp(&probs[j])).unwrap();
        let once = update_state(&rho, &model, k).unwrap();
        prop_assert!(DensityOperator::new(once.matrix().clone(), vec![2, 3]).is_ok());
        let twice = update_state(&once, &model, k).unwrap();
        prop_assert!(close(once.matrix(), twice.matrix(), 1e-10));
    }

    #[test]
    fn outcome_probabilities_sum_to_one(seed in any::<u64>(), outcomes in 1usize..5) {
        let mut r = rng(seed);
        let rho = random_state(&mut r, vec![2, 2]);
        let model = random_measurement_model(&mut r, 2, outcomes, Target::Subsystem(0)).unwrap();
        let probs = outcome_distribution(&rho, &model).unwrap();
        prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        for (k, &p) in probs.iter().enumerate() {
            let direct = born_probability(&rho, &model.embedded_effect(k, rho.dims()).unwrap()).unwrap();
            prop_assert!((p - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_independence_for_random_states(seed in any::<u64>(), a in 0.0..PI, b in 0.0..PI) {
        let mut r = rng(seed);
        let rho = random_state(&mut r, vec![2, 2]);
        let s = BellScenario::new(rho, a, b).unwrap();
        let grid: Vec<f64> = (0..6).map(|k| k as f64 * PI / 6.0).collect();
        prop_assert!(check_parameter_independence(&s, &grid, 1e-12).unwrap().holds);
    }

    #[test]
    fn phi_plus_conditional_is_cos_squared(a in -PI..PI, b in -PI..PI) {
        let j = quantum_joint(&make_phi_plus(), a, b).unwrap();
        prop_assume!(j.marginal_b()[0] > 1e-9);
        let c = conditional_probability(&j, Given::B(0)).unwrap()[0];
        prop_assert!((c - (a - b).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn lhv_models_are_causal_stable(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let lhv = LhvModel::random(&mut r, n, vec![0.0, 0.7], vec![0.2, 1.4]);
        let report = stability_report(&CausalModel::from_lhv(&lhv), 1e-12).unwrap();
        prop_assert_eq!(report.verdict(), "causal-stable");
    }

    #[test]
    fn csv_numbers_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_csv_number(v).parse::<f64>().unwrap(), v);
    }
}
