//! Regulated versus well-regulated functions and one-sided limits of compositions.

use delaydiff::regulated::{classify, composition_probe, PieceForm, PiecewiseFunction, Side};

fn main() -> delaydiff::Result<()> {
    let x_sin = PieceForm::LinearOscillation { center: 0.0, offset: 0.0, a: 0.0, b: 1.0, k: 1.0 };
    let cases = [
        ("x sin(1/x)", PiecewiseFunction::single(-1.0, 1.0, x_sin.clone())?),
        ("2x + x sin(1/x)", PiecewiseFunction::single(-1.0, 1.0, PieceForm::LinearOscillation { center: 0.0, offset: 0.0, a: 2.0, b: 1.0, k: 1.0 })?),
        ("exp(-1/x^2) sin(1/x)", PiecewiseFunction::single(-1.0, 1.0, PieceForm::FlatOscillation { center: 0.0, scale: 1.0, k: 1.0 })?),
        ("sign(x sin(1/x))", PiecewiseFunction::single(-1.0, 1.0, PieceForm::SignOf { inner: Box::new(x_sin.clone()) })?),
    ];
    for (name, f) in &cases {
        println!("{name:>22}: {:?}", classify(f));
    }

    let sign = PiecewiseFunction::single(-3.0, 3.0, PieceForm::Sign { center: 0.0 })?;
    for (name, phi) in &cases[..2] {
        let r = composition_probe(&sign, phi, 0.0, Side::Right, 40, 1.0)?;
        println!("sign o {name} at 0+: {:?}", r.limit_exists);
    }
    Ok(())
}
