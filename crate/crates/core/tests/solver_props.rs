mod common;

use delaydiff::kernel::{iteration_count, n_of};
use delaydiff::scenario::rational_grid;
use delaydiff::signal::SignalForm;
use delaydiff::spectral::adapted_norm;
use delaydiff::stability::{certify_exponential, empirical_decay, CertificateKind};
use delaydiff::{solve_representation, solve_representation_trajectory, solve_stepping};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn stepping_matches_representation(seed in any::<u64>(), family in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scn = common::random_scenario(&mut rng, family, 30.0, rational_grid(0.0, 30.0, 10));
        let a = solve_representation_trajectory(&scn).unwrap();
        let b = solve_stepping(&scn).unwrap();
        for (p, q) in a.samples.iter().zip(&b.samples) {
            prop_assert_eq!(p.t, q.t);
            for (u, v) in p.x.iter().zip(&q.x) {
                prop_assert!((u - v).abs() < 1e-10, "t = {}: {} vs {}", p.t, u, v);
            }
        }
        prop_assert!(a.residual_report < 1e-12);
    }

    #[test]
    fn representation_is_a_matrix_power(seed in any::<u64>(), family in 0usize..5, t in 0.0f64..30.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scn = common::random_scenario(&mut rng, family, 30.0, vec![]);
        let table = iteration_count(&scn.delay, t).unwrap();
        let expected = scn.matrix.power(table.n_of_t) * scn.initial.eval(table.landing()).unwrap();
        let x = solve_representation(&scn, t).unwrap();
        prop_assert!((x - expected).amax() <= 1e-12);
    }

    #[test]
    fn solution_is_linear_in_the_history(seed in any::<u64>(), family in 0usize..5, t in 0.0f64..30.0, c in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scn = common::random_scenario(&mut rng, family, 30.0, vec![]);
        let mut scaled = scn.clone();
        if let SignalForm::Sampled { values, .. } = &mut scaled.initial.form {
            values.iter_mut().flatten().for_each(|v| *v *= c);
        }
        let x = solve_representation(&scn, t).unwrap();
        let y = solve_representation(&scaled, t).unwrap();
        prop_assert!((y - x * c).amax() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn certified_bounds_hold(seed in any::<u64>(), family in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scn = common::random_scenario(&mut rng, family, 30.0, rational_grid(0.0, 30.0, 10));
        if let Ok(cert) = certify_exponential(&scn, 0.05, CertificateKind::PointwiseExp) {
            prop_assert!(cert.gamma > 0.0 && cert.c > 0.0);
            let traj = solve_representation_trajectory(&scn).unwrap();
            let fit = empirical_decay(&traj, (0.0, 30.0), Some(&cert)).unwrap();
            prop_assert_eq!(fit.bound_satisfied, Some(true));
        }
    }

    #[test]
    fn adapted_norm_is_within_epsilon(seed in any::<u64>(), d in 1usize..5, eps in 0.01f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_matrix(&mut rng, d, 0.9);
        let rho = m.spectral_radius().unwrap();
        let norm = adapted_norm(&m, eps).unwrap();
        prop_assert!(norm.achieved_operator_norm <= rho + eps + 1e-9);
        prop_assert!(norm.achieved_operator_norm + 1e-9 >= rho);
        let x = DVector::from_fn(d, |i, _| (i as f64 + 1.0).sin());
        let (lo, hi) = norm.euclidean_equivalence();
        prop_assert!(lo * x.norm() <= norm.norm(&x) * (1.0 + 1e-12));
        prop_assert!(norm.norm(&x) <= hi * x.norm() * (1.0 + 1e-12));
    }
}

#[test]
fn constant_delay_closed_form() {
    let scn = delaydiff::registry::scenario(delaydiff::registry::ExampleId::ConstantDelay).unwrap();
    for t in [0.0, 0.5, 1.0, 7.25, 49.99] {
        let n = n_of(&scn.delay, t).unwrap();
        assert_eq!(n, t.floor() as usize + 1);
        assert_eq!(solve_representation(&scn, t).unwrap()[0], 0.5f64.powi(n as i32));
    }
}
