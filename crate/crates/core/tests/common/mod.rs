#![allow(dead_code)]

use delaydiff::regulated::{PieceForm, PiecewiseFunction, Side};
use delaydiff::{DelaySpec, Interpolation, Scenario, Segment, Signal, SystemMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// History start that covers `σ₁(0)` for every family in [`random_delay`].
pub const HISTORY_START: f64 = -3.0;

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> SystemMatrix {
    let rows: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let m = SystemMatrix::from_rows(&rows).unwrap();
    let rho = m.spectral_radius().unwrap();
    if rho == 0.0 {
        return m;
    }
    let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * radius / rho).collect()).collect();
    SystemMatrix::from_rows(&scaled).unwrap()
}

/// One of the closed-form families with `τ(0) ≤ 3`.
pub fn random_delay(rng: &mut ChaCha8Rng, family: usize) -> DelaySpec {
    match family % 5 {
        0 => DelaySpec::constant(rng.gen_range(0.2..3.0)).unwrap(),
        1 => DelaySpec::affine(rng.gen_range(0.0..0.9), rng.gen_range(0.2..3.0)).unwrap(),
        2 => DelaySpec::dyadic(),
        3 => {
            let b1 = rng.gen_range(0.5..2.0);
            let b2 = b1 + rng.gen_range(0.5..2.0);
            DelaySpec::piecewise(
                vec![0.0, b1, b2],
                vec![
                    Segment { value: rng.gen_range(0.5..3.0), slope: rng.gen_range(-0.2..0.5) },
                    Segment { value: rng.gen_range(0.8..3.0), slope: 0.0 },
                    Segment { value: rng.gen_range(0.8..3.0), slope: rng.gen_range(0.0..0.8) },
                ],
            )
            .unwrap()
        }
        _ => DelaySpec::new(delaydiff::DelayKind::FloorShift).unwrap(),
    }
}

pub fn random_history(rng: &mut ChaCha8Rng, d: usize) -> Signal {
    let grid: Vec<f64> = (0..=6).map(|i| HISTORY_START + 0.5 * i as f64).collect();
    let values = grid.iter().map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let interp = if rng.gen_bool(0.5) { Interpolation::Linear } else { Interpolation::LeftConstant };
    Signal::sampled(grid, values, interp).unwrap()
}

pub fn random_scenario(rng: &mut ChaCha8Rng, family: usize, horizon: f64, grid: Vec<f64>) -> Scenario {
    let d = rng.gen_range(1..=3);
    let radius = rng.gen_range(0.3..0.95);
    let m = random_matrix(rng, d, radius);
    let delay = random_delay(rng, family);
    let h = random_history(rng, d);
    Scenario::new(m, delay, h, horizon, grid).unwrap()
}

/// Piecewise-monotone inner function on `[−1, 1]` with values in `[−5, 5]`.
pub fn random_well_regulated(rng: &mut ChaCha8Rng) -> PiecewiseFunction {
    let b1 = rng.gen_range(-0.6..-0.1);
    let b2 = rng.gen_range(0.1..0.6);
    let bps = vec![-1.0, b1, b2, 1.0];
    let pieces = bps
        .windows(2)
        .map(|w| {
            let center = rng.gen_range(w[0]..w[1]);
            match rng.gen_range(0..4) {
                0 => PieceForm::Constant { value: rng.gen_range(-2.0..2.0) },
                1 => {
                    let slope = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    PieceForm::Affine { slope, intercept: rng.gen_range(-1.0..1.0) }
                }
                2 => PieceForm::Power { center, exponent: rng.gen_range(1.0..3.0), scale: rng.gen_range(-1.0..1.0) },
                _ => {
                    let a: f64 = rng.gen_range(1.0..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let b = rng.gen_range(-0.9..0.9) * a.abs();
                    PieceForm::LinearOscillation { center, offset: rng.gen_range(-1.0..1.0), a, b, k: rng.gen_range(0.5..2.0) }
                }
            }
        })
        .collect();
    PiecewiseFunction::new(bps, pieces).unwrap()
}

/// Regulated outer function on `[−10, 10]`, with jumps and oscillation centers in `[−3, 3]`.
pub fn random_regulated(rng: &mut ChaCha8Rng) -> PiecewiseFunction {
    let b1 = rng.gen_range(-3.0..-0.5);
    let b2 = rng.gen_range(0.5..3.0);
    let bps = vec![-10.0, b1, b2, 10.0];
    let pieces = bps
        .windows(2)
        .map(|w: &[f64]| {
            let center = rng.gen_range(w[0].max(-3.0)..w[1].min(3.0));
            match rng.gen_range(0..5) {
                0 => PieceForm::Sign { center },
                1 => PieceForm::Affine { slope: rng.gen_range(-2.0..2.0), intercept: rng.gen_range(-1.0..1.0) },
                2 => PieceForm::Power { center, exponent: rng.gen_range(1.0..3.0), scale: rng.gen_range(-0.1..0.1) },
                3 => PieceForm::FlatOscillation { center, scale: rng.gen_range(-1.0..1.0), k: rng.gen_range(0.5..2.0) },
                _ => PieceForm::LinearOscillation {
                    center,
                    offset: rng.gen_range(-1.0..1.0),
                    a: rng.gen_range(-1.0..1.0),
                    b: rng.gen_range(-1.0..1.0),
                    k: rng.gen_range(0.5..2.0),
                },
            }
        })
        .collect();
    PiecewiseFunction::new(bps, pieces).unwrap()
}

/// A probe point: a breakpoint or center of `phi` half the time, else uniform.
pub fn random_probe_point(rng: &mut ChaCha8Rng, phi: &PiecewiseFunction) -> (f64, Side) {
    let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
    let special: Vec<f64> = phi.breakpoints[1..phi.breakpoints.len() - 1]
        .iter()
        .copied()
        .chain(phi.pieces.iter().filter_map(|p| match p {
            PieceForm::Power { center, .. } | PieceForm::LinearOscillation { center, .. } => Some(*center),
            _ => None,
        }))
        .collect();
    let t0 = if rng.gen_bool(0.5) { special[rng.gen_range(0..special.len())] } else { rng.gen_range(-0.95..0.95) };
    (t0, side)
}
