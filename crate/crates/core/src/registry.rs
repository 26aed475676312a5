//! Named, fully specified examples with expected values and tolerances.

use std::f64::consts::{E, LN_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::delay::{dyadic_exponent, DelayKind, DelaySpec, Interpolation, Segment};
use crate::error::{Error, Result};
use crate::hypotheses::{audit_hypotheses, Verdict};
use crate::kernel::{iteration_count, largest_delay, n_of};
use crate::matrix::SystemMatrix;
use crate::measure;
use crate::scenario::{rational_grid, uniform_grid, Scenario};
use crate::signal::{HistoryStart, Regularity, Signal, SignalForm};
use crate::solver::{
    compatibility_defect, largest_delay_window, solve_representation, solve_representation_trajectory,
    solve_state_dependent, solve_stepping, window_norm, NonUniqueSolution, PowerFamily, StateWindow, Trajectory,
};
use crate::stability::{
    certify_exponential, certify_exponential_lp, certify_exponential_with, continuous_dependence_sweep,
    empirical_decay, fit_log_rate, CertificateKind, SweepMode,
};
use crate::transport::{
    BoundaryHistory, CharacteristicMaps, LambdaForm, ScalarForm, TransportField, TransportSolution,
};
use crate::solver::History;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleId {
    ConstantDelay,
    DegenerateTplus1,
    NonuniquenessRemarkH2,
    #[serde(rename = "example-3-1-blowup")]
    Example31Blowup,
    DyadicUnbounded,
    ExistContinuousExample,
    CdMatrixSequence,
    CdTauCounterexample,
    TransportConstant,
    TransportVarying,
    StatedepDemo,
}

impl ExampleId {
    pub const ALL: [ExampleId; 11] = [
        ExampleId::ConstantDelay,
        ExampleId::DegenerateTplus1,
        ExampleId::NonuniquenessRemarkH2,
        ExampleId::Example31Blowup,
        ExampleId::DyadicUnbounded,
        ExampleId::ExistContinuousExample,
        ExampleId::CdMatrixSequence,
        ExampleId::CdTauCounterexample,
        ExampleId::TransportConstant,
        ExampleId::TransportVarying,
        ExampleId::StatedepDemo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleId::ConstantDelay => "constant-delay",
            ExampleId::DegenerateTplus1 => "degenerate-tplus1",
            ExampleId::NonuniquenessRemarkH2 => "nonuniqueness-remark-h2",
            ExampleId::Example31Blowup => "example-3-1-blowup",
            ExampleId::DyadicUnbounded => "dyadic-unbounded",
            ExampleId::ExistContinuousExample => "exist-continuous-example",
            ExampleId::CdMatrixSequence => "cd-matrix-sequence",
            ExampleId::CdTauCounterexample => "cd-tau-counterexample",
            ExampleId::TransportConstant => "transport-constant",
            ExampleId::TransportVarying => "transport-varying",
            ExampleId::StatedepDemo => "statedep-demo",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown example id '{s}'")))
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// A closed-form value of the mathematical problem.
    ClosedForm,
    /// An independent computation (quadrature, finite differences, a second solver).
    Computed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Within,
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub basis: Basis,
    pub passed: bool,
}

impl Check {
    pub fn within(name: &str, expected: f64, actual: f64, tolerance: f64, basis: Basis) -> Check {
        let passed = (actual - expected).abs() <= tolerance;
        Check { name: name.into(), expected, actual, tolerance, relation: Relation::Within, basis, passed }
    }

    pub fn relative(name: &str, expected: f64, actual: f64, rel: f64, basis: Basis) -> Check {
        Check::within(name, expected, actual, rel * expected.abs(), basis)
    }

    pub fn at_most(name: &str, bound: f64, actual: f64, basis: Basis) -> Check {
        Check { name: name.into(), expected: bound, actual, tolerance: 0.0, relation: Relation::AtMost, basis, passed: actual <= bound }
    }

    pub fn at_least(name: &str, bound: f64, actual: f64, basis: Basis) -> Check {
        Check { name: name.into(), expected: bound, actual, tolerance: 0.0, relation: Relation::AtLeast, basis, passed: actual >= bound }
    }

    pub fn flag(name: &str, ok: bool, basis: Basis) -> Check {
        Check::within(name, 1.0, if ok { 1.0 } else { 0.0 }, 0.0, basis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub id: ExampleId,
    pub seed: u64,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub tables: Vec<Table>,
    pub passed: bool,
}

impl ExampleReport {
    fn new(id: ExampleId, seed: u64, summary: serde_json::Value, checks: Vec<Check>, tables: Vec<Table>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        ExampleReport { id, seed, summary, checks, tables, passed }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn scalar_history(value: f64, start: f64) -> Signal {
    Signal::constant(vec![value], start)
}

fn csv_table(name: &str, header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> Table {
    let mut csv = String::from(header);
    csv.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    Table { name: name.into(), csv }
}

fn trajectory_table(name: &str, traj: &Trajectory) -> Table {
    Table { name: name.into(), csv: traj.to_csv() }
}

/// `𝐧(t)` for the dyadic spike delay from its closed form.
pub fn dyadic_counter_closed_form(t: f64) -> usize {
    if t < 0.0 {
        0
    } else if t < 1.0 {
        1
    } else {
        let k = dyadic_exponent(t).expect("t >= 1") as i64;
        (t.floor() as i64 - (k - 2) * (k + 1) / 2) as usize
    }
}

/// Piecewise delay equal to `t + 1`, `2`, `t − 1` on `[0,1)`, `[1,2)`, `[2,∞)`.
pub fn continuous_solution_delay() -> DelaySpec {
    DelaySpec::piecewise(
        vec![0.0, 1.0, 2.0],
        vec![
            Segment { value: 1.0, slope: 1.0 },
            Segment { value: 2.0, slope: 0.0 },
            Segment { value: 1.0, slope: 1.0 },
        ],
    )
    .expect("valid piecewise delay")
}

/// Linear history from `x₀(−1) = 1` to `x₀(0⁻) = 1/2`, compatible with `A = 1/2`.
fn compatible_history() -> Signal {
    Signal::sampled(vec![-1.0, 0.0], vec![vec![1.0], vec![0.5]], Interpolation::Linear).expect("valid history")
}

/// `u₀(x) = (1 + x)/2` on `[0, 1]`, compatible with `A = 1/2`.
fn transport_initial() -> Signal {
    Signal {
        start: HistoryStart::Finite(0.0),
        end: 1.0,
        form: SignalForm::Sampled {
            grid: vec![0.0, 1.0],
            values: vec![vec![0.5], vec![1.0]],
            interpolation: Interpolation::Linear,
        },
        points: Vec::new(),
        regularity: Regularity::Continuous,
    }
}

pub fn varying_field() -> TransportField {
    TransportField::new(LambdaForm::SeparableProduct {
        time: ScalarForm::Sine { mean: 1.0, amplitude: 0.3, frequency: 1.0, phase: 0.0 },
        space: ScalarForm::Sine { mean: 1.0, amplitude: 0.4, frequency: 1.0, phase: 0.0 },
    })
    .expect("valid field")
}

/// `τ(x_t) = 1 + ½·min(1, |x(t⁻)|)`, with values in `[1, 1.5]`.
pub fn statedep_delay(_t: f64, w: &StateWindow) -> Result<f64> {
    Ok(1.0 + 0.5 * w.left_limit()?.norm().min(1.0))
}

/// Scenario behind each example. Transport examples carry the induced delay and the boundary
/// history sampled on `[−T₀, 0]`; the state-dependent example carries its delay trace.
pub fn scenario(id: ExampleId) -> Result<Scenario> {
    let half = SystemMatrix::scalar(0.5);
    match id {
        ExampleId::ConstantDelay => Scenario::new(
            half,
            DelaySpec::constant(1.0)?,
            scalar_history(1.0, -1.0),
            50.0,
            rational_grid(0.0, 50.0, 100),
        ),
        ExampleId::DegenerateTplus1 => {
            Scenario::new(half, DelaySpec::affine(1.0, 1.0)?, compatible_history(), 20.0, rational_grid(0.0, 20.0, 100))
        }
        ExampleId::NonuniquenessRemarkH2 => Scenario::new(
            half,
            DelaySpec::proportional(1.0 - 1.0 / E, 1.0)?,
            scalar_history(1.0, -1.0),
            5.0,
            vec![0.5, 1.0, 2.0, 5.0],
        ),
        ExampleId::Example31Blowup => Scenario::new(
            half,
            DelaySpec::affine(0.75, 1.0)?,
            scalar_history(1.0, -1.0),
            84.0,
            vec![4.0, 20.0, 84.0],
        ),
        ExampleId::DyadicUnbounded => {
            Scenario::new(half, DelaySpec::dyadic(), scalar_history(1.0, -1.0), 64.0, rational_grid(0.0, 64.0, 100))
        }
        ExampleId::ExistContinuousExample => Scenario::new(
            half,
            continuous_solution_delay(),
            compatible_history(),
            6.0,
            rational_grid(0.0, 6.0, 100),
        ),
        ExampleId::CdMatrixSequence => {
            Scenario::new(half, DelaySpec::constant(1.0)?, scalar_history(0.5, -1.0), 10.0, rational_grid(0.0, 10.0, 100))
        }
        ExampleId::CdTauCounterexample => Scenario::new(
            SystemMatrix::scalar(1.0),
            DelaySpec::affine(1.0, 1.0)?,
            scalar_history(1.0, -1.0).with_point(-1.0, vec![0.0]),
            10.0,
            rational_grid(0.0, 10.0, 10),
        ),
        ExampleId::TransportConstant | ExampleId::TransportVarying => {
            let field = if id == ExampleId::TransportConstant { TransportField::constant(2.0)? } else { varying_field() };
            let maps = CharacteristicMaps::new(field)?;
            let u0 = transport_initial();
            let hist = BoundaryHistory { maps: &maps, u0: &u0 };
            let grid = uniform_grid(-maps.t0, 0.0, 200);
            let values = grid.iter().map(|s| Ok(hist.eval(*s)?.as_slice().to_vec())).collect::<Result<Vec<_>>>()?;
            let initial = Signal::sampled(grid, values, Interpolation::Linear)?;
            Scenario::new(half, maps.delay_spec()?, initial, 5.0, rational_grid(0.0, 5.0, 10))
        }
        ExampleId::StatedepDemo => {
            let traj = solve_state_dependent(&half, &statedep_delay, 1.0, 1.5, &scalar_history(1.0, -1.5), 20.0, 0.01)?;
            Ok(traj.scenario)
        }
    }
}

/// Runs an example and evaluates its checks.
pub fn run_example(id: ExampleId, seed: u64) -> Result<ExampleReport> {
    match id {
        ExampleId::ConstantDelay => constant_delay(seed),
        ExampleId::DegenerateTplus1 => degenerate(seed),
        ExampleId::NonuniquenessRemarkH2 => nonuniqueness(seed),
        ExampleId::Example31Blowup => blowup(seed),
        ExampleId::DyadicUnbounded => dyadic(seed),
        ExampleId::ExistContinuousExample => exist_continuous(seed),
        ExampleId::CdMatrixSequence => cd_matrix(seed),
        ExampleId::CdTauCounterexample => {
            let r = reproduce_cd_tau_counterexample()?;
            let summary = json!({ "persistent_gap": r.persistent_gap, "rows": r.rows.len() });
            let table = csv_table(
                "gaps.csv",
                "k,t,x_k,x,gap",
                r.rows.iter().map(|g| vec![g.k as f64, g.t, g.x_k, g.x, g.gap]),
            );
            Ok(ExampleReport::new(id, seed, summary, r.checks, vec![table]))
        }
        ExampleId::TransportConstant => transport_example(id, TransportField::constant(2.0)?, seed),
        ExampleId::TransportVarying => transport_example(id, varying_field(), seed),
        ExampleId::StatedepDemo => statedep(seed),
    }
}

fn counter_table(delay: &DelaySpec, grid: &[f64]) -> Result<Table> {
    let rows = grid.iter().map(|t| Ok(vec![*t, n_of(delay, *t)? as f64])).collect::<Result<Vec<_>>>()?;
    Ok(csv_table("counter.csv", "t,n", rows))
}

fn constant_delay(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::ConstantDelay;
    let scn = scenario(id)?;
    let mut checks = Vec::new();
    let mismatches = scn
        .grid
        .iter()
        .map(|t| Ok((n_of(&scn.delay, *t)? != t.floor() as usize + 1) as usize))
        .sum::<Result<usize>>()?;
    checks.push(Check::within("counter equals floor(t)+1", 0.0, mismatches as f64, 0.0, Basis::ClosedForm));
    let rep = solve_representation_trajectory(&scn)?;
    let exact_gap = rep
        .samples
        .iter()
        .map(|s| (s.x[0] - 0.5f64.powi(s.t.floor() as i32 + 1)).abs())
        .fold(0.0, f64::max);
    checks.push(Check::within("x(t) = 0.5^(floor(t)+1)", 0.0, exact_gap, 0.0, Basis::ClosedForm));
    let step = solve_stepping(&scn)?;
    let gap = rep.samples.iter().zip(&step.samples).map(|(a, b)| (a.x[0] - b.x[0]).abs()).fold(0.0, f64::max);
    checks.push(Check::at_most("stepping matches representation", 1e-12, gap, Basis::Computed));
    let cert = certify_exponential(&scn, 0.1, CertificateKind::PointwiseExp)?;
    checks.push(Check::within("certificate C", 1.0, cert.c, 1e-12, Basis::ClosedForm));
    checks.push(Check::within("certificate gamma", LN_2, cert.gamma, 1e-12, Basis::ClosedForm));
    let fit = empirical_decay(&rep, (0.0, 50.0), Some(&cert))?;
    checks.push(Check::flag("certificate bound holds on the grid", fit.bound_satisfied == Some(true), Basis::Computed));
    checks.push(Check::relative("fitted decay rate", LN_2, fit.gamma_hat, 0.05, Basis::ClosedForm));
    let lp = certify_exponential_lp(&scn, 1.0, 0.1)?;
    checks.push(Check::within("Lp certificate C", 4.0, lp.c, 1e-12, Basis::ClosedForm));
    checks.push(Check::within("Lp certificate gamma", LN_2, lp.gamma, 1e-12, Basis::ClosedForm));
    let summary = json!({ "certificate": cert, "lp_certificate": lp, "fit": fit });
    let tables = vec![trajectory_table("trajectory.csv", &rep), counter_table(&scn.delay, &scn.grid)?];
    Ok(ExampleReport::new(id, seed, summary, checks, tables))
}

fn degenerate(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::DegenerateTplus1;
    let scn = scenario(id)?;
    let mut checks = Vec::new();
    let mismatches = scn.grid.iter().map(|t| Ok((n_of(&scn.delay, *t)? != 1) as usize)).sum::<Result<usize>>()?;
    checks.push(Check::within("counter is 1 on the half-line", 0.0, mismatches as f64, 0.0, Basis::ClosedForm));
    let rep = solve_representation_trajectory(&scn)?;
    let dev = rep.samples.iter().map(|s| (s.x[0] - 0.5).abs()).fold(0.0, f64::max);
    checks.push(Check::within("x(t) = A x0(-1)", 0.0, dev, 0.0, Basis::ClosedForm));
    checks.push(Check::within("h(0)", 1.0, largest_delay(&scn.delay, 0.0, scn.horizon)?.h_of_t, 0.0, Basis::ClosedForm));
    let audit = audit_hypotheses(&scn.delay, &scn.matrix, scn.horizon, Some(1.0));
    checks.push(Check::flag("sigma1 does not tend to infinity", audit.verdict("H8") == Some(Verdict::Fails), Basis::ClosedForm));
    checks.push(Check::flag("no affine lower bound on the counter", audit.verdict("H11") == Some(Verdict::Fails), Basis::ClosedForm));
    let summary = json!({ "hypotheses": audit });
    Ok(ExampleReport::new(id, seed, summary, checks, vec![trajectory_table("trajectory.csv", &rep)]))
}

fn nonuniqueness(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::NonuniquenessRemarkH2;
    let scn = scenario(id)?;
    let mut checks = Vec::new();
    let sols = [0.0, 1.0]
        .iter()
        .map(|rho| {
            Ok(NonUniqueSolution {
                matrix: &scn.matrix,
                delay: &scn.delay,
                initial: &scn.initial,
                family: PowerFamily::new(&scn.matrix, Complex::new(*rho, 0.0))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for (sol, name) in sols.iter().zip(["residual rho=0", "residual rho=1"]) {
        let r = scn.grid.iter().map(|t| sol.residual(*t)).collect::<Result<Vec<_>>>()?;
        checks.push(Check::at_most(name, 1e-12, r.into_iter().fold(0.0, f64::max), Basis::Computed));
    }
    let same_history = [-1.0, -0.5, -0.25]
        .iter()
        .map(|s| Ok((sols[0].eval(*s)? - sols[1].eval(*s)?).amax()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::within("shared initial condition", 0.0, same_history, 0.0, Basis::ClosedForm));
    let apart = (sols[0].eval(1.0)? - sols[1].eval(1.0)?).amax();
    checks.push(Check::within("trajectories differ at t=1", 1.0, apart, 1e-12, Basis::ClosedForm));
    checks.push(Check::flag(
        "representation formula unavailable",
        matches!(iteration_count(&scn.delay, 1.0), Err(Error::NoPositiveInfimum { .. })),
        Basis::ClosedForm,
    ));
    let audit = audit_hypotheses(&scn.delay, &scn.matrix, scn.horizon, None);
    checks.push(Check::flag("infimum of the delay fails", audit.verdict("H1") == Some(Verdict::Fails), Basis::ClosedForm));
    let grid = uniform_grid(0.0, 5.0, 500);
    let rows = grid
        .iter()
        .map(|t| Ok(vec![*t, sols[0].eval(*t)?[0], sols[1].eval(*t)?[0]]))
        .collect::<Result<Vec<_>>>()?;
    let summary = json!({ "lambda": sols[1].family.lambda.re, "alpha": sols[1].family.alpha.re });
    Ok(ExampleReport::new(id, seed, summary, checks, vec![csv_table("family.csv", "t,x_rho0,x_rho1", rows)]))
}

fn blowup(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::Example31Blowup;
    let scn = scenario(id)?;
    let traj = solve_representation_trajectory(&scn)?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    let mut norms = Vec::new();
    for (n, t) in scn.grid.iter().enumerate() {
        let w = largest_delay_window(&scn, *t)?;
        let v = window_norm(&traj, *t, 1.0, w)?;
        let expected = 2f64.powi(n as i32 + 1);
        checks.push(Check::relative(&format!("L1 window norm at t={t}"), expected, v, 0.01, Basis::ClosedForm));
        rows.push(vec![(n + 1) as f64, *t, w, v]);
        norms.push(v);
    }
    let ns = [1.0, 2.0, 3.0];
    let (rate, _) = fit_log_rate(&ns, &norms)?;
    checks.push(Check::relative("growth rate per step", LN_2, rate, 0.01, Basis::ClosedForm));
    let check = measure::check_h6_h9(&scn.delay, &scn.matrix, 1.0, 100.0)?;
    checks.push(Check::within("density times rho^p", 2.0, check.product, 0.05, Basis::ClosedForm));
    checks.push(Check::flag("product condition fails", check.verdict_h9 == Verdict::Fails, Basis::ClosedForm));
    checks.push(Check::flag(
        "Lp certificate refused",
        matches!(certify_exponential_lp(&scn, 1.0, 0.1), Err(Error::NoCertificate(_))),
        Basis::ClosedForm,
    ));
    let summary = json!({ "norms": norms, "product": check.product });
    Ok(ExampleReport::new(id, seed, summary, checks, vec![csv_table("norms.csv", "n,t,window,l1_norm", rows)]))
}

fn dyadic(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::DyadicUnbounded;
    let scn = scenario(id)?;
    let mut checks = Vec::new();
    let mut mismatches = 0usize;
    let mut below = 0usize;
    for t in &scn.grid {
        let n = n_of(&scn.delay, *t)?;
        mismatches += (n != dyadic_counter_closed_form(*t)) as usize;
        below += ((n as f64) < t / 2.0 - 1.0) as usize;
    }
    checks.push(Check::within("counter matches closed form", 0.0, mismatches as f64, 0.0, Basis::ClosedForm));
    checks.push(Check::within("counter >= t/2 - 1", 0.0, below as f64, 0.0, Basis::ClosedForm));
    let cert = certify_exponential_with(&scn, 0.1, CertificateKind::PointwiseExp, 0.5, -1.0)?;
    checks.push(Check::within("certificate C", 2.0, cert.c, 1e-12, Basis::ClosedForm));
    checks.push(Check::within("certificate gamma", 0.5 * LN_2, cert.gamma, 1e-12, Basis::ClosedForm));
    let traj = solve_representation_trajectory(&scn)?;
    let fit = empirical_decay(&traj, (0.0, 64.0), Some(&cert))?;
    checks.push(Check::flag("certificate bound holds on [0, 64]", fit.bound_satisfied == Some(true), Basis::Computed));
    let audit = audit_hypotheses(&scn.delay, &scn.matrix, scn.horizon, Some(1.0));
    checks.push(Check::flag("delay is unbounded", audit.verdict("H10") == Some(Verdict::Fails), Basis::ClosedForm));
    let summary = json!({ "certificate": cert, "fit": fit, "hypotheses": audit });
    let tables = vec![counter_table(&scn.delay, &scn.grid)?, trajectory_table("trajectory.csv", &traj)];
    Ok(ExampleReport::new(id, seed, summary, checks, tables))
}

fn exist_continuous(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::ExistContinuousExample;
    let scn = scenario(id)?;
    let a = 0.5;
    let x0 = |s: f64| 1.0 - 0.5 * (s + 1.0);
    let formula = |t: f64| {
        if t < 0.0 {
            x0(t)
        } else if t < 1.0 {
            a * x0(-1.0)
        } else if t < 2.0 {
            a * x0(t - 2.0)
        } else {
            a * a * x0(-1.0)
        }
    };
    let mut checks = Vec::new();
    let grid = rational_grid(-1.0, 6.0, 100);
    let mut dev: f64 = 0.0;
    let mut rows = Vec::new();
    for t in &grid {
        let x = if *t < 0.0 { scn.initial.eval(*t)?[0] } else { solve_representation(&scn, *t)?[0] };
        dev = dev.max((x - formula(*t)).abs());
        rows.push(vec![*t, x]);
    }
    checks.push(Check::at_most("solution matches the piecewise formula", 1e-15, dev, Basis::ClosedForm));
    checks.push(Check::within("compatibility defect", 0.0, compatibility_defect(&scn)?, 1e-15, Basis::ClosedForm));
    let mut jump: f64 = 0.0;
    for b in [0.0, 1.0, 2.0] {
        let left = if b == 0.0 { scn.initial.left_limit_at_end()?[0] } else { solve_representation(&scn, b - 1e-9)?[0] };
        jump = jump.max((solve_representation(&scn, b)?[0] - left).abs());
    }
    checks.push(Check::at_most("no jump at 0, 1, 2", 1e-8, jump, Basis::ClosedForm));
    let audit = audit_hypotheses(&scn.delay, &scn.matrix, scn.horizon, None);
    let h2 = audit.get("H2").expect("H2 entry");
    checks.push(Check::flag("delay jumps at t=2", h2.verdict == Verdict::Fails && h2.witness == Some(2.0), Basis::ClosedForm));
    let summary = json!({ "hypotheses": audit });
    Ok(ExampleReport::new(id, seed, summary, checks, vec![csv_table("trajectory.csv", "t,x_1", rows)]))
}

fn cd_matrix(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::CdMatrixSequence;
    let base = scenario(id)?;
    let a = 0.5;
    let a_k = move |k: usize| a + 1.0 / k as f64;
    let table = continuous_dependence_sweep(
        &|k| SystemMatrix::scalar(a_k(k)),
        &|k| scalar_history(a_k(k), -1.0),
        &base,
        100,
        SweepMode::UniformCompact,
        (-1.0, 10.0),
    )?;
    let mut checks = Vec::new();
    checks.push(Check::flag("sup distance decreasing in k", table.strictly_decreasing, Basis::Computed));
    let last = table.rows.last().expect("100 rows").sup_distance;
    checks.push(Check::at_most("sup distance at k=100", 1e-2, last, Basis::Computed));
    let mut scn7 = base.clone();
    scn7.matrix = SystemMatrix::scalar(a_k(7));
    scn7.initial = scalar_history(a_k(7), -1.0);
    let dev = base
        .grid
        .iter()
        .map(|t| Ok((solve_representation(&scn7, *t)?[0] / a_k(7).powi(t.floor() as i32 + 2) - 1.0).abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check::at_most("x_k(t) = (a+1/k)^(floor(t)+2) at k=7", 1e-14, dev, Basis::ClosedForm));
    let global = continuous_dependence_sweep(
        &|k| SystemMatrix::scalar(a_k(k)),
        &|k| scalar_history(a_k(k), -1.0),
        &base,
        20,
        SweepMode::UniformGlobal,
        (-1.0, 10.0),
    )?;
    checks.push(Check::flag("uniform-global distances eventually decrease", global.eventually_decreasing, Basis::Computed));
    let tail_ok = global.rows.iter().filter(|r| r.k >= 3).all(|r| r.tail_bound.is_some_and(|b| b.is_finite()));
    checks.push(Check::flag("tail bound certified once |a + 1/k| < 1", tail_ok, Basis::Computed));
    let summary = json!({ "a": a, "last_distance": last, "global": global });
    let tables = vec![
        Table { name: "sweep.csv".into(), csv: table.to_csv() },
        Table { name: "sweep_global.csv".into(), csv: global.to_csv() },
    ];
    Ok(ExampleReport::new(id, seed, summary, checks, tables))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub k: usize,
    pub t: f64,
    pub x_k: f64,
    pub x: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdTauReport {
    pub rows: Vec<GapRow>,
    /// The common gap when every row has the same one.
    pub persistent_gap: Option<f64>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Delays `τ_k(t) = t + 1 − 1/(k+2)` against `τ(t) = t + 1`, history 1 on `(−1, 0)` and 0 at `−1`.
pub fn reproduce_cd_tau_counterexample() -> Result<CdTauReport> {
    let limit = scenario(ExampleId::CdTauCounterexample)?;
    let mut rows = Vec::new();
    for k in 0..=50usize {
        let mut scn = limit.clone();
        scn.delay = DelaySpec::affine(1.0, 1.0 - 1.0 / (k as f64 + 2.0))?;
        for t in &limit.grid {
            let x_k = solve_representation(&scn, *t)?[0];
            let x = solve_representation(&limit, *t)?[0];
            rows.push(GapRow { k, t: *t, x_k, x, gap: (x_k - x).abs() });
        }
    }
    let first = rows[0].gap;
    let persistent_gap = rows.iter().all(|r| r.gap == first).then_some(first);
    let pick = |k: usize, t: f64| rows.iter().find(|r| r.k == k && r.t == t).expect("sampled point");
    let checks = vec![
        Check::within("x_5(3)", 1.0, pick(5, 3.0).x_k, 0.0, Basis::ClosedForm),
        Check::within("x(3)", 0.0, pick(5, 3.0).x, 0.0, Basis::ClosedForm),
        Check::within(
            "largest deviation of the gap from 1",
            0.0,
            rows.iter().map(|r| (r.gap - 1.0).abs()).fold(0.0, f64::max),
            0.0,
            Basis::ClosedForm,
        ),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(CdTauReport { rows, persistent_gap, checks, passed })
}

/// `(‖v_t‖_p on [R(t,1), t], ‖u(t)‖_p on [0, 1])` by midpoint quadrature.
pub fn transport_norms(sol: &TransportSolution, t: f64, p: f64, cells: usize) -> Result<(f64, f64)> {
    let lo = sol.maps.hitting_time(t, 1.0)?;
    let hv = (t - lo) / cells as f64;
    let hx = 1.0 / cells as f64;
    let (mut v, mut u) = (0.0, 0.0);
    for i in 0..cells {
        let s = lo + (i as f64 + 0.5) * hv;
        v += sol.boundary(s)?.norm().powf(p) * hv;
        let x = (i as f64 + 0.5) * hx;
        u += sol.u(t, x)?.norm().powf(p) * hx;
    }
    Ok((v.powf(1.0 / p), u.powf(1.0 / p)))
}

fn transport_example(id: ExampleId, field: TransportField, seed: u64) -> Result<ExampleReport> {
    let maps = CharacteristicMaps::new(field.clone())?;
    let a = SystemMatrix::scalar(0.5);
    let u0 = transport_initial();
    let sol = TransportSolution::new(&maps, &a, &u0)?;
    let mut checks = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let constant = id == ExampleId::TransportConstant;

    if constant {
        checks.push(Check::within("T0", 0.5, maps.t0, 1e-8, Basis::ClosedForm));
        let dev = [0.0, 1.0, 2.5, 10.0]
            .iter()
            .map(|t| Ok((maps.induced_delay(*t)? - 0.5).abs()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        checks.push(Check::at_most("induced delay is 0.5", 1e-8, dev, Basis::ClosedForm));
        // R = 0.85, v(0.35) = A v(−0.15) = A u₀(0.3)
        checks.push(Check::within("u(1, 0.3)", 0.25 * 0.65, sol.u(1.0, 0.3)?[0], 1e-8, Basis::ClosedForm));
    } else {
        let (lo, hi) = (1.0 / field.lambda_max(), 1.0 / field.lambda_min());
        let mut outside: f64 = 0.0;
        for i in 0..=20 {
            let tau = maps.induced_delay(0.25 * i as f64)?;
            outside = outside.max(lo - tau).max(tau - hi);
        }
        checks.push(Check::at_most("induced delay within speed bounds", 1e-9, outside, Basis::ClosedForm));
    }
    checks.push(Check::within("compatibility defect", 0.0, sol.compatibility_defect()?, 1e-15, Basis::ClosedForm));

    let (mut semi, mut rev): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let (r, s, t) = (rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0));
        let x = rng.gen_range(-1.0..2.0);
        semi = semi.max((maps.flow(t, s, maps.flow(s, r, x)) - maps.flow(t, r, x)).abs());
        rev = rev.max((maps.flow(r, t, maps.flow(t, r, x)) - x).abs());
    }
    checks.push(Check::at_most("flow semigroup", 1e-8, semi, Basis::Computed));
    checks.push(Check::at_most("flow reversibility", 1e-8, rev, Basis::Computed));

    let (mut dx_err, mut dt_err): (f64, f64) = (0.0, 0.0);
    let h = 1e-4;
    for _ in 0..20 {
        let (t, x) = (rng.gen_range(0.5..5.0), rng.gen_range(0.05..0.95));
        let fd_x = (maps.hitting_time(t, x + h)? - maps.hitting_time(t, x - h)?) / (2.0 * h);
        let fd_t = (maps.hitting_time(t + h, x)? - maps.hitting_time(t - h, x)?) / (2.0 * h);
        dx_err = dx_err.max((maps.dx_hitting_time(t, x)? - fd_x).abs());
        dt_err = dt_err.max((maps.dt_hitting_time(t, x)? - fd_t).abs());
    }
    checks.push(Check::at_most("dR/dx against central differences", 1e-5, dx_err, Basis::Computed));
    checks.push(Check::at_most("dR/dt against central differences", 1e-5, dt_err, Basis::Computed));

    let mut rows = Vec::new();
    let mut sandwich_ok = true;
    for t in [1.0, 2.0, 5.0] {
        for p in [1.0, 2.0] {
            let (v, u) = transport_norms(&sol, t, p, 400)?;
            let lower = field.beta1().powf(-1.0 / p) * v;
            let upper = field.beta0().powf(-1.0 / p) * v;
            sandwich_ok &= lower <= u * (1.0 + 1e-6) && u <= upper * (1.0 + 1e-6);
            rows.push(vec![t, p, lower, u, upper]);
        }
    }
    checks.push(Check::flag("norm sandwich at t in {1,2,5}, p in {1,2}", sandwich_ok, Basis::Computed));

    let xs = uniform_grid(0.0, 1.0, 50);
    let mut profile = Vec::new();
    for t in [0.0, 1.0, 2.0, 5.0] {
        for x in &xs {
            profile.push(vec![t, *x, sol.u(t, *x)?[0]]);
        }
    }
    let summary = json!({
        "t0": maps.t0,
        "lambda_min": field.lambda_min(),
        "lambda_max": field.lambda_max(),
        "beta0": field.beta0(),
        "beta1": field.beta1(),
    });
    let tables = vec![
        csv_table("sandwich.csv", "t,p,lower,u_norm,upper", rows),
        csv_table("profile.csv", "t,x,u", profile),
    ];
    Ok(ExampleReport::new(id, seed, summary, checks, tables))
}

fn statedep(seed: u64) -> Result<ExampleReport> {
    let id = ExampleId::StatedepDemo;
    let half = SystemMatrix::scalar(0.5);
    let initial = scalar_history(1.0, -1.5);
    let traj = solve_state_dependent(&half, &statedep_delay, 1.0, 1.5, &initial, 20.0, 0.01)?;
    let gamma = LN_2 / 1.5;
    let mut checks = Vec::new();
    checks.push(Check::within("x(0)", 0.5, traj.samples[0].x[0], 0.0, Basis::ClosedForm));
    let worst = traj
        .samples
        .iter()
        .map(|s| s.x[0].abs() / (-gamma * s.t).exp())
        .fold(0.0, f64::max);
    checks.push(Check::at_most("|x(t)| <= exp(-t ln2 / 1.5)", 1.0 + 1e-12, worst, Basis::ClosedForm));
    let DelayKind::Tabulated { values, .. } = traj.scenario.delay.kind() else {
        return Err(Error::Invalid("state-dependent trace must be tabulated".into()));
    };
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    checks.push(Check::flag("delay trace within [1, 1.5]", lo >= 1.0 && hi <= 1.5, Basis::ClosedForm));
    let fit = empirical_decay(&traj, (0.0, 20.0), None)?;
    checks.push(Check::at_least("fitted decay rate", gamma, fit.gamma_hat, Basis::ClosedForm));
    let trace = csv_table(
        "delay_trace.csv",
        "t,tau",
        traj.scenario.grid.iter().zip(values).map(|(t, v)| vec![*t, *v]),
    );
    let summary = json!({ "gamma_bound": gamma, "fit": fit });
    Ok(ExampleReport::new(id, seed, summary, checks, vec![trajectory_table("trajectory.csv", &traj), trace]))
}
