//! L¹ window norms growing like 2ⁿ although every pointwise value decays.

use delaydiff::solver::{largest_delay_window, window_norm};
use delaydiff::{solve_representation_trajectory, DelaySpec, Scenario, Signal, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let scn = Scenario::new(
        SystemMatrix::scalar(0.5),
        DelaySpec::affine(0.75, 1.0)?,
        Signal::constant(vec![1.0], -1.0),
        340.0,
        vec![4.0, 20.0, 84.0, 340.0],
    )?;
    let traj = solve_representation_trajectory(&scn)?;
    for (s, t) in traj.samples.iter().zip(&scn.grid) {
        let w = largest_delay_window(&scn, *t)?;
        println!("t = {t:5}  x(t) = {:.6}  window {w:5}  L1 norm {:.4}", s.x[0], window_norm(&traj, *t, 1.0, w)?);
    }
    Ok(())
}
