use delaydiff::measure::{check_h6_h9, estimate_pushforward, estimate_pushforward_seeded, GUARD_BAND};
use delaydiff::{DelaySpec, SystemMatrix, Verdict};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn affine_density_and_mass(slope in 0.0f64..0.8, c in 0.2f64..2.0, t_end in 5.0f64..50.0, seed in any::<u64>()) {
        let d = DelaySpec::affine(slope, c).unwrap();
        let est = estimate_pushforward_seeded(&d, t_end, 32, 20_000, seed).unwrap();
        prop_assert!((est.mass() / t_end - 1.0).abs() < 1e-9);
        let expected = 1.0 / (1.0 - slope);
        for v in &est.density {
            prop_assert!((v / expected - 1.0).abs() < 0.03, "density {} vs {}", v, expected);
        }
        prop_assert!((est.bin_edges[0] + c).abs() < 1e-2);
    }

    #[test]
    fn product_verdict_matches_closed_form(slope in 0.0f64..0.9, a in 0.05f64..1.5, p in 1.0f64..4.0) {
        let d = DelaySpec::affine(slope, 1.0).unwrap();
        let r = check_h6_h9(&d, &SystemMatrix::scalar(a), p, 10.0).unwrap();
        let product = a.powf(p) / (1.0 - slope);
        prop_assert!((r.product - product).abs() < 1e-12 * product);
        let expected = if product < 1.0 - GUARD_BAND {
            Verdict::Holds
        } else if product > 1.0 + GUARD_BAND {
            Verdict::Fails
        } else {
            Verdict::Undecidable
        };
        prop_assert_eq!(r.verdict_h9, expected);
    }
}

#[test]
fn estimates_are_deterministic_per_seed() {
    let d = DelaySpec::dyadic();
    let a = estimate_pushforward_seeded(&d, 40.0, 64, 10_000, 7).unwrap();
    let b = estimate_pushforward_seeded(&d, 40.0, 64, 10_000, 7).unwrap();
    let c = estimate_pushforward_seeded(&d, 40.0, 64, 10_000, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.density, c.density);
}

#[test]
fn rejects_coarse_requests() {
    let d = DelaySpec::constant(1.0).unwrap();
    assert!(estimate_pushforward(&d, 10.0, 8, 100_000).is_err());
    assert!(estimate_pushforward(&d, 10.0, 64, 1_000).is_err());
}

#[test]
fn flat_piece_fails_both_conditions() {
    let d = DelaySpec::affine(1.0, 1.0).unwrap();
    let r = check_h6_h9(&d, &SystemMatrix::scalar(0.1), 1.0, 10.0).unwrap();
    assert!(r.product.is_infinite());
    assert_eq!((r.verdict_h6, r.verdict_h9), (Verdict::Fails, Verdict::Fails));
}
