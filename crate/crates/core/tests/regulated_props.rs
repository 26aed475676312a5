mod common;

use delaydiff::regulated::{classify, composition_probe, LimitVerdict, PieceForm, PiecewiseFunction};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn well_regulated_inner_keeps_limits(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = common::random_well_regulated(&mut rng);
        let f = common::random_regulated(&mut rng);
        prop_assert!(classify(&phi).well_regulated);
        prop_assert!(classify(&f).regulated);
        let (t0, side) = common::random_probe_point(&mut rng, &phi);
        let spread = 0.01f64.min(0.5 * (1.0 - t0.abs()));
        let r = composition_probe(&f, &phi, t0, side, 40, spread).unwrap();
        prop_assert_eq!(r.limit_exists, LimitVerdict::Exists, "t0 = {}, {:?}", t0, side);
    }

    #[test]
    fn reparameterization_preserves_class(seed in any::<u64>(), c in 0.2f64..5.0, d in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = common::random_well_regulated(&mut rng);
        let g = phi.reparameterize(c, d).unwrap();
        let (a, b) = g.domain();
        prop_assert_eq!(classify(&g).well_regulated, classify(&phi).well_regulated);
        for i in 0..=10 {
            let t = a + (b - a) * (i as f64 + 0.5) / 11.0;
            prop_assert!((g.eval(t).unwrap() - phi.eval((c * t + d).clamp(-1.0, 1.0)).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn oscillation_class_follows_coefficients(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        prop_assume!((a.abs() - b.abs()).abs() > 1e-6 && b != 0.0);
        let f = PiecewiseFunction::single(-1.0, 1.0, PieceForm::LinearOscillation { center: 0.0, offset: 0.0, a, b, k: 1.0 }).unwrap();
        let c = classify(&f);
        prop_assert!(c.regulated);
        prop_assert_eq!(c.well_regulated, a.abs() > b.abs());
    }
}

#[test]
fn evaluation_outside_the_domain_fails() {
    let f = PiecewiseFunction::identity(0.0, 1.0);
    assert!(f.eval(1.5).is_err());
}
