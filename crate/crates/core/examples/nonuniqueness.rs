//! Two solutions with the same history when the delay vanishes at 0⁺.

use delaydiff::solver::{NonUniqueSolution, PowerFamily};
use delaydiff::{DelaySpec, Signal, SystemMatrix};
use nalgebra::Complex;

fn main() -> delaydiff::Result<()> {
    let a = SystemMatrix::scalar(0.5);
    let delay = DelaySpec::proportional(1.0 - (-1f64).exp(), 1.0)?;
    let initial = Signal::constant(vec![1.0], -1.0);
    let sols = [0.0, 1.0, -2.0].map(|rho| NonUniqueSolution {
        matrix: &a,
        delay: &delay,
        initial: &initial,
        family: PowerFamily::new(&a, Complex::new(rho, 0.0)).expect("nonzero eigenvalue"),
    });
    println!("{:>6} {:>12} {:>12} {:>12}", "t", "rho=0", "rho=1", "rho=-2");
    for t in [-0.5, 0.0, 0.5, 1.0, 2.0, 5.0] {
        let v: Vec<f64> = sols.iter().map(|s| s.eval(t).map(|x| x[0])).collect::<delaydiff::Result<_>>()?;
        println!("{t:>6} {:>12.6} {:>12.6} {:>12.6}", v[0], v[1], v[2]);
    }
    let worst = sols
        .iter()
        .flat_map(|s| [0.5, 1.0, 2.0, 5.0].map(|t| s.residual(t)))
        .collect::<delaydiff::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    println!("max residual {worst:.2e}");
    Ok(())
}
