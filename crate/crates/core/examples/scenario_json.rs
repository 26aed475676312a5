//! Loading a scenario from JSON, solving it, and printing window norms.

use delaydiff::solver::{largest_delay_window, window_norm};
use delaydiff::{solve_representation_trajectory, Scenario};

const CONFIG: &str = r#"{
    "matrix": [[0.3, 0.4], [0.0, -0.6]],
    "delay": { "kind": "piecewise-affine", "breakpoints": [0.0, 2.0],
               "segments": [{ "value": 1.0, "slope": 0.25 }, { "value": 0.8, "slope": 0.0 }] },
    "initial": { "start": { "finite": -1.0 }, "form": "sampled", "grid": [-1.0, -0.5, 0.0],
                 "values": [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], "interpolation": "linear",
                 "regularity": "continuous" },
    "horizon": 8.0,
    "grid": [0.5, 1.0, 2.0, 4.0, 8.0]
}"#;

fn main() -> delaydiff::Result<()> {
    let scn: Scenario = serde_json::from_str(CONFIG).expect("valid scenario JSON");
    scn.validate()?;
    let traj = solve_representation_trajectory(&scn)?;
    print!("{}", traj.to_csv());
    for t in &scn.grid {
        let w = largest_delay_window(&scn, *t)?;
        println!("t = {t}: h(t) = {w:.3}, L2 window norm = {:.6}", window_norm(&traj, *t, 2.0, w)?);
    }
    Ok(())
}
