//! Transport on [0, 1] with boundary feedback, solved through the induced difference equation.

use delaydiff::signal::{HistoryStart, Regularity, SignalForm};
use delaydiff::transport::{solve_transport, CharacteristicMaps, LambdaForm, ScalarForm, TransportField};
use delaydiff::{Interpolation, Signal, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let field = TransportField::new(LambdaForm::SeparableProduct {
        time: ScalarForm::Sine { mean: 1.0, amplitude: 0.3, frequency: 1.0, phase: 0.0 },
        space: ScalarForm::Sine { mean: 1.0, amplitude: 0.4, frequency: 1.0, phase: 0.0 },
    })?;
    let maps = CharacteristicMaps::new(field)?;
    println!("T0 = {:.6}", maps.t0);
    for t in [0.0, 1.0, 2.0, 5.0] {
        println!("tau({t}) = {:.6}, R({t}, 0.5) = {:.6}", maps.induced_delay(t)?, maps.hitting_time(t, 0.5)?);
    }
    // u0(0) = A u0(1), so the solution is continuous
    let u0 = Signal {
        start: HistoryStart::Finite(0.0),
        end: 1.0,
        form: SignalForm::Sampled { grid: vec![0.0, 1.0], values: vec![vec![0.5], vec![1.0]], interpolation: Interpolation::Linear },
        points: vec![],
        regularity: Regularity::Continuous,
    };
    let a = SystemMatrix::scalar(0.5);
    let xs: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
    for t in [0.0, 1.0, 3.0] {
        let u = solve_transport(&maps, &a, &u0, t, &xs)?;
        let row: Vec<String> = u.iter().map(|v| format!("{:.5}", v[0])).collect();
        println!("u({t}, ·) = [{}]", row.join(", "));
    }
    Ok(())
}
