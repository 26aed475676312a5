//! Runs every registered example and prints its checks.

use delaydiff::registry::{run_example, ExampleId};

fn main() -> delaydiff::Result<()> {
    for id in ExampleId::ALL {
        let report = run_example(id, delaydiff::measure::DEFAULT_SEED)?;
        println!("{id}: {}", if report.passed { "pass" } else { "FAIL" });
        for c in &report.checks {
            println!("    [{}] {} = {} (expected {}, {:?})", if c.passed { "ok" } else { "!!" }, c.name, c.actual, c.expected, c.basis);
        }
    }
    Ok(())
}
