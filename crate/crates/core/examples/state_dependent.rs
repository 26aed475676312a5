//! A delay depending on the state through x(t⁻).

use delaydiff::solver::{solve_state_dependent, StateWindow};
use delaydiff::{Signal, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let tau = |_t: f64, w: &StateWindow| -> delaydiff::Result<f64> { Ok(1.0 + 0.5 * w.left_limit()?.norm().min(1.0)) };
    let traj = solve_state_dependent(&SystemMatrix::scalar(-0.8), &tau, 1.0, 1.5, &Signal::constant(vec![1.0], -1.5), 12.0, 0.05)?;
    for s in traj.samples.iter().step_by(20) {
        println!("t = {:5.2}  x = {:+.6}", s.t, s.x[0]);
    }
    println!("residual {:.2e}", traj.residual_report);
    Ok(())
}
