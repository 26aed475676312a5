//! Solutions of `x(t) = A x(t − τ(t))`: representation formula, block stepping,
//! window norms, the proportional-delay non-uniqueness family and state-dependent stepping.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::delay::{DelayKind, DelaySpec, Interpolation};
use crate::error::{Error, Result};
use crate::kernel::{iteration_count, largest_delay};
use crate::matrix::SystemMatrix;
use crate::scenario::Scenario;
use crate::signal::Signal;
use crate::spectral;

/// Anything that can supply `x₀(s)` on `[left, 0)`.
pub trait History {
    fn dim(&self) -> usize;
    fn left(&self) -> f64;
    fn eval(&self, s: f64) -> Result<DVector<f64>>;
}

impl History for Signal {
    fn dim(&self) -> usize {
        Signal::dim(self)
    }

    fn left(&self) -> f64 {
        Signal::left(self)
    }

    fn eval(&self, s: f64) -> Result<DVector<f64>> {
        Signal::eval(self, s)
    }
}

/// `x(t) = A^𝐧(t) x₀(σ_𝐧(t)(t))`.
pub fn represent(matrix: &SystemMatrix, delay: &DelaySpec, history: &dyn History, t: f64) -> Result<DVector<f64>> {
    if t < 0.0 {
        return history.eval(t);
    }
    let table = iteration_count(delay, t)?;
    let x0 = history.eval(table.landing())?;
    Ok(matrix.power(table.n_of_t) * x0)
}

pub fn solve_representation(scn: &Scenario, t: f64) -> Result<DVector<f64>> {
    represent(&scn.matrix, &scn.delay, &scn.initial, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Representation,
    Stepping,
    Statedep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub scenario: Scenario,
    pub samples: Vec<Sample>,
    pub method: Method,
    /// Max of `|x(t) − A x(σ₁(t))|` over grid points `t ≥ 0`.
    pub residual_report: f64,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.scenario.dim()
    }

    /// `x(s)`: exact for fixed delays, sample lookup for state-dependent runs.
    pub fn value_at(&self, s: f64) -> Result<DVector<f64>> {
        match self.method {
            Method::Statedep => self.sample_lookup(s),
            _ => solve_representation(&self.scenario, s),
        }
    }

    fn sample_lookup(&self, s: f64) -> Result<DVector<f64>> {
        if s < 0.0 {
            return self.scenario.initial.eval(s);
        }
        let i = self.samples.partition_point(|p| p.t <= s + 1e-9 * (1.0 + s.abs()));
        match i.checked_sub(1).map(|j| &self.samples[j]) {
            Some(p) if p.t >= 0.0 => Ok(DVector::from_vec(p.x.clone())),
            _ => Err(Error::HistoryOutOfRange { s, left: 0.0 }),
        }
    }

    /// CSV with header `t,x_1,…,x_d`.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::from("t");
        for i in 1..=d {
            out.push_str(&format!(",x_{i}"));
        }
        out.push('\n');
        for p in &self.samples {
            out.push_str(&format!("{}", p.t));
            for v in &p.x {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn residual(scn: &Scenario, samples: &[Sample]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples.iter().filter(|p| p.t >= 0.0) {
        let prev = solve_representation(scn, scn.delay.sigma1(p.t)?)?;
        let lhs = DVector::from_vec(p.x.clone());
        worst = worst.max((lhs - scn.matrix.apply(&prev)).amax());
    }
    Ok(worst)
}

/// Samples of the representation formula on the scenario grid.
pub fn solve_representation_trajectory(scn: &Scenario) -> Result<Trajectory> {
    let samples = scn
        .grid
        .iter()
        .map(|t| Ok(Sample { t: *t, x: solve_representation(scn, *t)?.as_slice().to_vec() }))
        .collect::<Result<Vec<_>>>()?;
    let residual_report = residual(scn, &samples)?;
    Ok(Trajectory { scenario: scn.clone(), samples, method: Method::Representation, residual_report })
}

/// Block start `(lo, closed)` of the block containing `t`.
struct Blocks {
    starts: Vec<(f64, bool)>,
}

impl Blocks {
    fn for_scenario(scn: &Scenario) -> Result<Self> {
        let big_t = scn.horizon;
        let inf = scn.delay.infimum_on(big_t);
        if inf > 0.0 {
            let half = 0.5 * inf;
            let m = (big_t / half).ceil().max(1.0) as usize;
            let delta = big_t / m as f64;
            Ok(Blocks { starts: (0..m).map(|k| (k as f64 * delta, true)).collect() })
        } else if scn.delay.finite_orbit_bound().is_some() {
            // {0} and (0, T]: σ₁ maps (0, T] into (−∞, 0]
            Ok(Blocks { starts: vec![(0.0, true), (0.0, false)] })
        } else {
            Err(Error::NoPositiveInfimum { t: big_t })
        }
    }

    fn start_of(&self, t: f64) -> (f64, bool) {
        let i = self.starts.partition_point(|(lo, closed)| if *closed { *lo <= t } else { *lo < t });
        self.starts[i.max(1) - 1]
    }
}

/// Block-by-block construction: each grid value is `A` applied to already-built history.
pub fn solve_stepping(scn: &Scenario) -> Result<Trajectory> {
    scn.validate()?;
    let blocks = Blocks::for_scenario(scn)?;
    let mut samples: Vec<Sample> = Vec::with_capacity(scn.grid.len());
    for &t in &scn.grid {
        if t < 0.0 {
            samples.push(Sample { t, x: scn.initial.eval(t)?.as_slice().to_vec() });
            continue;
        }
        let (lo, closed) = blocks.start_of(t);
        let built = |s: f64| if closed { s < lo } else { s <= lo };
        let mut s = scn.delay.sigma1(t)?;
        let mut applications = 1usize;
        let mut v = loop {
            if s < 0.0 {
                break scn.initial.eval(s)?;
            }
            if !built(s) {
                return Err(Error::OrderViolation { s, block_start: lo });
            }
            let j = samples.partition_point(|p| p.t < s);
            if j < samples.len() && samples[j].t == s {
                break DVector::from_vec(samples[j].x.clone());
            }
            s = scn.delay.sigma1(s)?;
            applications += 1;
        };
        for _ in 0..applications {
            v = scn.matrix.apply(&v);
        }
        samples.push(Sample { t, x: v.as_slice().to_vec() });
    }
    let residual_report = residual(scn, &samples)?;
    Ok(Trajectory { scenario: scn.clone(), samples, method: Method::Stepping, residual_report })
}

/// `|x₀(0⁻) − A x₀(−τ(0))|`: zero when the history is compatible with a continuous solution.
pub fn compatibility_defect(scn: &Scenario) -> Result<f64> {
    let left = scn.initial.left_limit_at_end()?;
    let back = scn.initial.eval(scn.delay.sigma1(0.0)?)?;
    Ok((left - scn.matrix.apply(&back)).norm())
}

const SCAN_POINTS: usize = 2000;
const CELLS_PER_PIECE: usize = 64;

/// Points in `(lo, hi)` where `𝐧` changes, located by bisection on a scan grid.
fn counter_jumps(delay: &DelaySpec, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let a = lo.max(0.0);
    let mut out = Vec::new();
    if hi <= a {
        return Ok(out);
    }
    if lo < 0.0 {
        out.push(0.0);
    }
    let n = |t: f64| crate::kernel::n_of(delay, t);
    let mut prev_t = a;
    let mut prev_n = n(a)?;
    for i in 1..=SCAN_POINTS {
        let t = a + (hi - a) * i as f64 / SCAN_POINTS as f64;
        let cur = n(t)?;
        if cur != prev_n {
            let (mut l, mut r) = (prev_t, t);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                if m <= l || m >= r {
                    break;
                }
                if n(m)? == prev_n {
                    l = m;
                } else {
                    r = m;
                }
            }
            out.push(r);
        }
        prev_t = t;
        prev_n = cur;
    }
    Ok(out)
}

/// `‖x_t‖` over `[t − window, t]`: sup over samples for `p = ∞`, otherwise composite
/// midpoint quadrature split at the jumps of `𝐧` and the breakpoints of `τ` and `x₀`.
pub fn window_norm(traj: &Trajectory, t: f64, p: f64, window: f64) -> Result<f64> {
    let (lo, hi) = (t - window, t);
    if !(window > 0.0) || lo < traj.scenario.initial.left() || hi > traj.scenario.horizon {
        return Err(Error::Window { lo, hi });
    }
    if p.is_infinite() {
        return Ok(traj
            .samples
            .iter()
            .filter(|s| s.t >= lo && s.t <= hi)
            .map(|s| s.x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max));
    }
    let mut cuts = vec![lo, hi];
    match traj.method {
        Method::Statedep => cuts.extend(traj.samples.iter().map(|s| s.t).filter(|s| *s > lo && *s < hi)),
        _ => {
            cuts.extend(counter_jumps(&traj.scenario.delay, lo, hi)?);
            cuts.extend(traj.scenario.delay.breakpoints_in(lo.max(0.0), hi));
        }
    }
    cuts.extend(traj.scenario.initial.breakpoints_in(lo, hi.min(0.0)));
    cuts.retain(|c| *c >= lo && *c <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / CELLS_PER_PIECE as f64;
        if h <= 0.0 {
            continue;
        }
        for i in 0..CELLS_PER_PIECE {
            let s = w[0] + (i as f64 + 0.5) * h;
            total += traj.value_at(s)?.norm().powf(p) * h;
        }
    }
    Ok(total.powf(1.0 / p))
}

/// Window `h(t)` from the largest-delay function (scan up to the horizon when needed).
pub fn largest_delay_window(scn: &Scenario, t: f64) -> Result<f64> {
    Ok(largest_delay(&scn.delay, t, scn.horizon)?.h_of_t)
}

/// One member `Re(ρ·t^α·v)` of the solution family for `τ(t) = (1 − 1/e)·t`,
/// with `λ = e^α` the eigenvalue of largest modulus and `v` a unit eigenvector.
#[derive(Debug, Clone)]
pub struct PowerFamily {
    pub lambda: Complex<f64>,
    pub alpha: Complex<f64>,
    pub v: DVector<Complex<f64>>,
    pub rho: Complex<f64>,
}

impl PowerFamily {
    pub fn new(matrix: &SystemMatrix, rho: Complex<f64>) -> Result<Self> {
        let a = matrix.entries();
        let lambda = spectral::eigenvalues(a)?
            .into_iter()
            .max_by(|x, y| x.norm().total_cmp(&y.norm()))
            .filter(|z| z.norm() > 0.0)
            .ok_or(Error::Nilpotent)?;
        let d = a.nrows();
        let shifted = DMatrix::from_fn(d, d, |i, j| {
            Complex::new(a[(i, j)], 0.0) - if i == j { lambda } else { Complex::new(0.0, 0.0) }
        });
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.ok_or(Error::NoConvergence)?;
        let k = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let v = vt.row(k).adjoint();
        Ok(PowerFamily { lambda, alpha: lambda.ln(), v, rho })
    }

    /// Value at `t > 0`.
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let scale = self.rho * (self.alpha * t.ln()).exp();
        self.v.map(|c| (scale * c).re)
    }
}

/// `Re(ρ·t^α·v)` for the dominant eigenpair of `A`.
pub fn nonuniqueness_family(matrix: &SystemMatrix, rho: f64, t: f64) -> Result<DVector<f64>> {
    if !(t > 0.0) {
        return Err(Error::Domain(t));
    }
    Ok(PowerFamily::new(matrix, Complex::new(rho, 0.0))?.eval(t))
}

/// Solution of the proportional-delay equation built from a family member:
/// history on `[−τ(0), 0)`, `x(0) = A x₀(−τ(0))`, the family for `t > 0`.
pub struct NonUniqueSolution<'a> {
    pub matrix: &'a SystemMatrix,
    pub delay: &'a DelaySpec,
    pub initial: &'a Signal,
    pub family: PowerFamily,
}

impl NonUniqueSolution<'_> {
    pub fn eval(&self, t: f64) -> Result<DVector<f64>> {
        if t < 0.0 {
            self.initial.eval(t)
        } else if t == 0.0 {
            Ok(self.matrix.apply(&self.initial.eval(self.delay.sigma1(0.0)?)?))
        } else {
            Ok(self.family.eval(t))
        }
    }

    pub fn residual(&self, t: f64) -> Result<f64> {
        let lhs = self.eval(t)?;
        let rhs = self.matrix.apply(&self.eval(self.delay.sigma1(t)?)?);
        Ok((lhs - rhs).amax())
    }
}

/// Read access to the state-dependent solution while it is being built.
pub struct StateWindow<'a> {
    pub t: f64,
    step: f64,
    built: &'a [Vec<f64>],
    initial: &'a Signal,
}

impl StateWindow<'_> {
    /// `x_t(0⁻)`.
    pub fn left_limit(&self) -> Result<DVector<f64>> {
        match self.built.last() {
            Some(x) => Ok(DVector::from_vec(x.clone())),
            None => self.initial.left_limit_at_end(),
        }
    }

    /// `x_t(θ) = x(t + θ)` for `θ < 0`.
    pub fn at(&self, theta: f64) -> Result<DVector<f64>> {
        lookup(self.initial, self.built, self.step, self.t + theta)
    }
}

fn lookup(initial: &Signal, built: &[Vec<f64>], step: f64, s: f64) -> Result<DVector<f64>> {
    if s < 0.0 {
        return initial.eval(s);
    }
    let j = (s / step + 1e-9).floor() as usize;
    built
        .get(j)
        .map(|x| DVector::from_vec(x.clone()))
        .ok_or(Error::OrderViolation { s, block_start: built.len() as f64 * step })
}

/// Explicit stepping for `x(t) = A x(t − τ(t, x_t))` with step below `τ_min`. The induced
/// delay trace is stored as a left-constant tabulated delay in the returned scenario.
pub fn solve_state_dependent(
    matrix: &SystemMatrix,
    tau_sd: &dyn Fn(f64, &StateWindow) -> Result<f64>,
    tau_min: f64,
    tau_max: f64,
    initial: &Signal,
    horizon: f64,
    max_step: f64,
) -> Result<Trajectory> {
    if !(tau_min > 0.0 && tau_min <= tau_max && tau_max.is_finite()) {
        return Err(Error::Invalid("need 0 < tau_min <= tau_max < inf".into()));
    }
    if initial.left() > -tau_max {
        return Err(Error::Invalid("initial condition must cover [-tau_max, 0)".into()));
    }
    let h0 = max_step.min(0.5 * tau_min);
    let m = (horizon / h0).ceil().max(1.0) as usize;
    let step = horizon / m as f64;
    let times: Vec<f64> = (0..=m).map(|k| if k == m { horizon } else { k as f64 * step }).collect();
    let mut built: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut trace = Vec::with_capacity(m + 1);
    for &t in &times {
        let view = StateWindow { t, step, built: &built, initial };
        let tau = tau_sd(t, &view)?;
        if !(tau >= tau_min && tau <= tau_max) {
            return Err(Error::StateDelayOutOfRange { t, value: tau, min: tau_min, max: tau_max });
        }
        let prev = lookup(initial, &built, step, t - tau)?;
        built.push(matrix.apply(&prev).as_slice().to_vec());
        trace.push(tau);
    }
    let delay = DelaySpec::new(DelayKind::Tabulated {
        grid: times.clone(),
        values: trace,
        interpolation: Interpolation::LeftConstant,
    })?;
    let scenario = Scenario::new(matrix.clone(), delay, initial.clone(), horizon, times.clone())?;
    let samples = times.into_iter().zip(built).map(|(t, x)| Sample { t, x }).collect();
    // every sample is A applied to a stored sample, so the grid residual is zero by construction
    Ok(Trajectory { scenario, samples, method: Method::Statedep, residual_report: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::rational_grid;

    fn scalar_scenario(a: f64, delay: DelaySpec, x0: f64, horizon: f64) -> Scenario {
        Scenario::new(
            SystemMatrix::scalar(a),
            delay,
            Signal::constant(vec![x0], -1.0),
            horizon,
            rational_grid(0.0, horizon, 10),
        )
        .unwrap()
    }

    #[test]
    fn representation_examples() {
        let scn = scalar_scenario(0.5, DelaySpec::constant(1.0).unwrap(), 1.0, 5.0);
        assert_eq!(solve_representation(&scn, 3.5).unwrap()[0], 0.0625);
        assert_eq!(solve_representation(&scn, -0.25).unwrap()[0], 1.0);
        let a = 0.3;
        let scn = scalar_scenario(a, DelaySpec::constant(1.0).unwrap(), a, 5.0);
        for t in [0.0f64, 0.5, 1.0, 2.7, 4.99] {
            let want = a.powi(t.floor() as i32 + 2);
            assert!((solve_representation(&scn, t).unwrap()[0] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn stepping_agrees_with_representation() {
        let scn = scalar_scenario(0.5, DelaySpec::constant(1.0).unwrap(), 1.0, 5.0);
        let traj = solve_stepping(&scn).unwrap();
        for p in &traj.samples {
            assert!((p.x[0] - solve_representation(&scn, p.t).unwrap()[0]).abs() < 1e-12);
        }
        assert!(traj.residual_report < 1e-12);
    }

    #[test]
    fn stepping_with_unit_proportional_delay() {
        let scn = scalar_scenario(0.5, DelaySpec::proportional(1.0, 1.0).unwrap(), 3.0, 2.0);
        let traj = solve_stepping(&scn).unwrap();
        assert_eq!(traj.samples[0].x[0], 1.5);
        assert!(traj.samples[1..].iter().all(|p| p.x[0] == 0.75));
    }

    #[test]
    fn zero_history_gives_zero() {
        let scn = scalar_scenario(0.9, DelaySpec::dyadic(), 0.0, 20.0);
        assert!(solve_stepping(&scn).unwrap().samples.iter().all(|p| p.x[0] == 0.0));
    }

    #[test]
    fn window_norm_of_constant() {
        let scn = scalar_scenario(1.0, DelaySpec::constant(1.0).unwrap(), 2.0, 5.0);
        let traj = solve_representation_trajectory(&scn).unwrap();
        assert!((window_norm(&traj, 3.0, 1.0, 1.5).unwrap() - 3.0).abs() < 1e-12);
        assert!(window_norm(&traj, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn power_family_at_one() {
        let a = SystemMatrix::scalar(0.5);
        assert!((nonuniqueness_family(&a, 1.0, 1.0).unwrap()[0].abs() - 1.0).abs() < 1e-15);
        assert_eq!(nonuniqueness_family(&a, 0.0, 3.0).unwrap()[0], 0.0);
        let nil = SystemMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(nonuniqueness_family(&nil, 1.0, 1.0), Err(Error::Nilpotent)));
    }

    #[test]
    fn state_dependent_constant_matches_stepping() {
        let a = SystemMatrix::scalar(0.5);
        let x0 = Signal::constant(vec![1.0], -1.0);
        let traj = solve_state_dependent(&a, &|_, _| Ok(1.0), 1.0, 1.0, &x0, 6.0, 0.05).unwrap();
        let scn = Scenario::new(a, DelaySpec::constant(1.0).unwrap(), x0, 6.0, traj.scenario.grid.clone()).unwrap();
        let reference = solve_stepping(&scn).unwrap();
        for (p, q) in traj.samples.iter().zip(&reference.samples) {
            assert!((p.x[0] - q.x[0]).abs() < 1e-12, "t = {}", p.t);
        }
    }

    #[test]
    fn state_dependent_rejects_out_of_range() {
        let a = SystemMatrix::scalar(0.5);
        let x0 = Signal::constant(vec![1.0], -2.0);
        let r = solve_state_dependent(&a, &|_, _| Ok(3.0), 1.0, 2.0, &x0, 3.0, 0.1);
        assert!(matches!(r, Err(Error::StateDelayOutOfRange { .. })));
    }
}
