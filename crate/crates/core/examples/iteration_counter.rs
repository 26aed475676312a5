//! Iteration counter and orbits for the dyadic spike delay.

use delaydiff::registry::dyadic_counter_closed_form;
use delaydiff::{iteration_count, largest_delay, DelaySpec};

fn main() -> delaydiff::Result<()> {
    let d = DelaySpec::dyadic();
    for t in [0.5, 3.0, 4.5, 10.0, 17.25, 64.0] {
        let table = iteration_count(&d, t)?;
        println!(
            "t = {t:6.2}  n(t) = {:3} (closed form {:3})  lands at {:+.2}  h(t) = {}",
            table.n_of_t,
            dyadic_counter_closed_form(t),
            table.landing(),
            largest_delay(&d, t, 128.0)?.h_of_t,
        );
    }
    let orbit = iteration_count(&d, 9.0)?.orbit;
    println!("orbit of 9: {orbit:?}");
    Ok(())
}
