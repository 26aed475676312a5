//! Hypothesis audit for a few delays.

use delaydiff::{audit_hypotheses, DelayKind, DelaySpec, SystemMatrix};

fn main() -> delaydiff::Result<()> {
    let a = SystemMatrix::scalar(0.5);
    let delays = [
        ("constant 1", DelaySpec::constant(1.0)?),
        ("affine 0.75 t + 1", DelaySpec::affine(0.75, 1.0)?),
        ("t + 1", DelaySpec::affine(1.0, 1.0)?),
        ("dyadic spikes", DelaySpec::dyadic()),
        ("floor(t) + 1", DelaySpec::new(DelayKind::FloorShift)?),
        ("(1 - 1/e) t", DelaySpec::proportional(1.0 - (-1f64).exp(), 1.0)?),
    ];
    for (name, d) in &delays {
        let report = audit_hypotheses(d, &a, 50.0, Some(1.0));
        let line: Vec<String> = report.entries.iter().map(|e| format!("{}:{:?}", e.id, e.verdict)).collect();
        println!("{name:>18}  {}", line.join(" "));
    }
    Ok(())
}
