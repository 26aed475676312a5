//! Pointwise, sup-window and Lp certificates with an adapted norm for a non-normal matrix.

use delaydiff::scenario::uniform_grid;
use delaydiff::spectral::adapted_norm;
use delaydiff::stability::{certify_exponential, certify_exponential_lp, CertificateKind};
use delaydiff::{DelaySpec, Scenario, Segment, Signal, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let a = SystemMatrix::from_rows(&[vec![0.6, 5.0], vec![0.0, 0.6]])?;
    let norm = adapted_norm(&a, 0.1)?;
    let (lo, hi) = norm.euclidean_equivalence();
    println!("rho = {:.3}, |A|_P = {:.4}, equivalence [{lo:.3}, {hi:.3}]", a.spectral_radius()?, norm.achieved_operator_norm);

    let scn = Scenario::new(
        a,
        DelaySpec::piecewise(
            vec![0.0, 2.0],
            vec![Segment { value: 0.5, slope: 0.25 }, Segment { value: 1.0, slope: 0.0 }],
        )?,
        Signal::constant(vec![1.0, 1.0], -1.0),
        30.0,
        uniform_grid(0.0, 30.0, 300),
    )?;
    for kind in [CertificateKind::PointwiseExp, CertificateKind::SupWindowExp] {
        match certify_exponential(&scn, 0.1, kind) {
            Ok(c) => println!("{kind:?}: C = {:.4}, gamma = {:.4}", c.c, c.gamma),
            Err(e) => println!("{kind:?}: {e}"),
        }
    }
    match certify_exponential_lp(&scn, 2.0, 0.1) {
        Ok(c) => println!("Lp(2): C = {:.4}, gamma = {:.4}", c.c, c.gamma),
        Err(e) => println!("Lp(2): {e}"),
    }
    Ok(())
}
