//! Histogram of the push-forward of Lebesgue measure under σ₁ and the product condition.

use delaydiff::measure::{check_h6_h9, estimate_pushforward};
use delaydiff::{DelaySpec, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let d = DelaySpec::affine(0.75, 1.0)?;
    let est = estimate_pushforward(&d, 100.0, 25, 100_000)?;
    println!("support [{:.3}, {:.3}], sup density {:.4}, mass {:.4}", est.bin_edges[0], est.bin_edges[25], est.sup_estimate, est.mass());
    print!("{}", est.to_csv());

    for (name, delay) in [("affine 0.75", d), ("constant 1", DelaySpec::constant(1.0)?), ("dyadic", DelaySpec::dyadic())] {
        let r = check_h6_h9(&delay, &SystemMatrix::scalar(0.5), 1.0, 64.0)?;
        println!("{name:>12}: phi_sup {:.3} product {:.3} -> {:?} (analytic: {})", r.phi_sup, r.product, r.verdict_h9, r.analytic);
    }
    Ok(())
}
