use delaydiff::registry::varying_field;
use delaydiff::signal::{HistoryStart, Regularity, SignalForm};
use delaydiff::transport::{CharacteristicMaps, LambdaForm, ScalarForm, Term, TransportField, TransportSolution};
use delaydiff::{Interpolation, Signal, SystemMatrix};
use proptest::prelude::*;
use std::sync::OnceLock;

fn maps() -> &'static CharacteristicMaps {
    static MAPS: OnceLock<CharacteristicMaps> = OnceLock::new();
    MAPS.get_or_init(|| CharacteristicMaps::new(varying_field()).unwrap())
}

fn u0() -> Signal {
    Signal {
        start: HistoryStart::Finite(0.0),
        end: 1.0,
        form: SignalForm::Sampled {
            grid: vec![0.0, 0.4, 1.0],
            values: vec![vec![0.5], vec![-0.3], vec![1.0]],
            interpolation: Interpolation::Linear,
        },
        points: vec![],
        regularity: Regularity::Continuous,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flow_semigroup_and_reversibility(r in 0.0f64..5.0, s in 0.0f64..5.0, t in 0.0f64..5.0, x in -1.0f64..2.0) {
        let m = maps();
        prop_assert!((m.flow(t, s, m.flow(s, r, x)) - m.flow(t, r, x)).abs() < 1e-8);
        prop_assert!((m.flow(r, t, m.flow(t, r, x)) - x).abs() < 1e-8);
    }

    #[test]
    fn hitting_time_lies_on_the_characteristic(t in 0.0f64..6.0, x in 0.0f64..1.0) {
        let m = maps();
        let r = m.hitting_time(t, x).unwrap();
        prop_assert!(r <= t);
        prop_assert!((m.flow(t, r, 0.0) - x).abs() < 1e-8);
    }

    #[test]
    fn hitting_time_decreases_in_x(t in 0.0f64..6.0, x in 0.0f64..0.9, dx in 0.01f64..0.1) {
        let m = maps();
        prop_assert!(m.hitting_time(t, x + dx).unwrap() < m.hitting_time(t, x).unwrap());
    }

    #[test]
    fn induced_delay_respects_speed_bounds(t in 0.0f64..10.0) {
        let m = maps();
        let f = varying_field();
        let tau = m.induced_delay(t).unwrap();
        prop_assert!(tau >= 1.0 / f.lambda_max() - 1e-9 && tau <= 1.0 / f.lambda_min() + 1e-9);
    }

    #[test]
    fn derivatives_match_central_differences(t in 0.5f64..5.0, x in 0.05f64..0.95) {
        let m = maps();
        let h = 1e-4;
        let fd_x = (m.hitting_time(t, x + h).unwrap() - m.hitting_time(t, x - h).unwrap()) / (2.0 * h);
        let fd_t = (m.hitting_time(t + h, x).unwrap() - m.hitting_time(t - h, x).unwrap()) / (2.0 * h);
        prop_assert!((m.dx_hitting_time(t, x).unwrap() - fd_x).abs() < 1e-5);
        prop_assert!((m.dt_hitting_time(t, x).unwrap() - fd_t).abs() < 1e-5);
    }

    #[test]
    fn solution_is_constant_along_characteristics(s in 0.0f64..3.0, dt in 0.0f64..2.0, x in 0.0f64..0.3) {
        let m = maps();
        let a = SystemMatrix::scalar(0.5);
        let init = u0();
        let sol = TransportSolution::new(m, &a, &init).unwrap();
        let t = s + dt;
        let y = m.flow(t, s, x);
        prop_assume!(y <= 1.0);
        prop_assert!((sol.u(t, y).unwrap() - sol.u(s, x).unwrap()).amax() < 1e-7);
    }

    #[test]
    fn boundary_condition_holds(t in 0.0f64..8.0) {
        let a = SystemMatrix::scalar(0.5);
        let init = u0();
        let sol = TransportSolution::new(maps(), &a, &init).unwrap();
        let lhs = sol.u(t, 0.0).unwrap();
        let rhs = a.apply(&sol.u(t, 1.0).unwrap());
        prop_assert!((lhs - rhs).amax() < 1e-7);
    }
}

#[test]
fn field_bounds() {
    let f = TransportField::new(LambdaForm::TimeVarying {
        terms: vec![
            Term { time: ScalarForm::Constant { value: 1.0 }, space: ScalarForm::Constant { value: 0.5 } },
            Term {
                time: ScalarForm::Sine { mean: 1.0, amplitude: 0.5, frequency: 2.0, phase: 0.0 },
                space: ScalarForm::Constant { value: 1.0 },
            },
        ],
    })
    .unwrap();
    assert_eq!((f.lambda_min(), f.lambda_max()), (1.0, 2.0));
    assert!(TransportField::constant(-1.0).is_err());
}

#[test]
fn rejects_initial_data_off_the_unit_interval() {
    let m = CharacteristicMaps::new(TransportField::constant(2.0).unwrap()).unwrap();
    let a = SystemMatrix::scalar(0.5);
    let bad = Signal::constant(vec![1.0], -1.0);
    assert!(TransportSolution::new(&m, &a, &bad).is_err());
}
