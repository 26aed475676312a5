//! Continuous dependence on (A, x₀) and its failure under perturbations of τ.

use delaydiff::registry::reproduce_cd_tau_counterexample;
use delaydiff::scenario::rational_grid;
use delaydiff::stability::{continuous_dependence_sweep, SweepMode};
use delaydiff::{DelaySpec, Scenario, Signal, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let a = 0.5;
    let base = Scenario::new(
        SystemMatrix::scalar(a),
        DelaySpec::constant(1.0)?,
        Signal::constant(vec![a], -1.0),
        10.0,
        rational_grid(0.0, 10.0, 10),
    )?;
    let ak = |k: usize| a + 1.0 / k as f64;
    let table = continuous_dependence_sweep(
        &|k| SystemMatrix::scalar(ak(k)),
        &|k| Signal::constant(vec![ak(k)], -1.0),
        &base,
        12,
        SweepMode::UniformGlobal,
        (-1.0, 10.0),
    )?;
    print!("{}", table.to_csv());
    println!("strictly decreasing: {}", table.strictly_decreasing);

    let tau = reproduce_cd_tau_counterexample()?;
    println!("tau perturbation: persistent gap {:?} over {} samples", tau.persistent_gap, tau.rows.len());
    Ok(())
}
