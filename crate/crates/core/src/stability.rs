//! Decay certificates `|x(t)| ≤ C e^{−γt}·sup|x₀|`, the affine lower bound on `𝐧`,
//! empirical rate fits and continuous-dependence sweeps.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::delay::{DelayKind, DelaySpec};
use crate::error::{Error, Result};
use crate::hypotheses::Verdict;
use crate::kernel::n_of;
use crate::matrix::SystemMatrix;
use crate::measure;
use crate::scenario::{rational_grid, Scenario};
use crate::signal::{HistoryStart, Signal};
use crate::solver::{solve_representation, Trajectory};
use crate::spectral::{adapted_norm, AdaptedNorm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H11Fit {
    pub alpha: f64,
    pub beta: f64,
    pub verdict: Verdict,
    /// `true` when `(α, β)` came from a closed form rather than the grid minorant.
    pub analytic: bool,
}

/// Best line `αt + β` below `𝐧` on a uniform grid of `[0, T]`, chosen to be largest at `T/2`
/// (an edge of the lower convex hull). A declared `τ_max` gives `(1/τ_max, 0)` directly.
pub fn verify_h11(delay: &DelaySpec, t_end: f64, grid: usize) -> H11Fit {
    if let Some(m) = delay.tau_max() {
        return H11Fit { alpha: 1.0 / m, beta: 0.0, verdict: Verdict::Holds, analytic: true };
    }
    let grid = grid.max(2);
    let mut pts = Vec::with_capacity(grid + 1);
    for i in 0..=grid {
        let t = t_end * i as f64 / grid as f64;
        match n_of(delay, t) {
            Ok(n) => pts.push((t, n as f64)),
            Err(_) => return H11Fit { alpha: 0.0, beta: 0.0, verdict: Verdict::Fails, analytic: false },
        }
    }
    let (alpha, beta) = minorant_at(&pts, 0.5 * t_end);
    // 𝐧 grows only logarithmically when τ grows linearly
    let sublinear = matches!(delay.kind(), DelayKind::Affine { slope, .. } if *slope > 0.0);
    let verdict = if alpha > 0.0 && !sublinear { Verdict::Holds } else { Verdict::Fails };
    H11Fit { alpha: alpha.max(0.0), beta: if alpha > 0.0 { beta } else { pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) }, verdict, analytic: sublinear }
}

/// Supporting line of the lower convex hull of `pts` (sorted by abscissa) at `x`.
fn minorant_at(pts: &[(f64, f64)], x: f64) -> (f64, f64) {
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let i = hull.partition_point(|p| p.0 <= x).clamp(1, hull.len().max(2) - 1);
    if hull.len() < 2 {
        return (0.0, hull.first().map_or(0.0, |p| p.1));
    }
    let (a, b) = (hull[i - 1], hull[i]);
    let slope = (b.1 - a.1) / (b.0 - a.0);
    (slope, a.1 - slope * a.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    PointwiseExp,
    SupWindowExp,
    LpExp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateInputs {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub tau_max: Option<f64>,
    pub phi_sup: Option<f64>,
    pub p: Option<f64>,
    /// `|A|_P` used in the formulas.
    pub operator_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub kind: CertificateKind,
    pub c: f64,
    pub gamma: f64,
    pub norm: AdaptedNorm,
    /// `(m, M)` with `m|x|₂ ≤ |x|_P ≤ M|x|₂`.
    pub euclidean_equivalence: (f64, f64),
    pub inputs: CertificateInputs,
}

impl DecayCertificate {
    /// `C e^{−γt}·initial`.
    pub fn bound(&self, t: f64, initial: f64) -> f64 {
        self.c * (-self.gamma * t).exp() * initial
    }
}

fn check_rho(matrix: &SystemMatrix) -> Result<f64> {
    let rho = matrix.spectral_radius()?;
    if rho >= 1.0 {
        return Err(Error::NoCertificate(format!("spectral radius {rho} >= 1")));
    }
    Ok(rho)
}

fn build_norm(matrix: &SystemMatrix, eps: f64) -> Result<(AdaptedNorm, f64)> {
    let norm = adapted_norm(matrix, eps)?;
    // nilpotent A: any positive rate works, report the formula at |A|_P = ε
    let op = if norm.achieved_operator_norm > 0.0 { norm.achieved_operator_norm } else { eps };
    Ok((norm, op))
}

/// Pointwise or sup-window certificate from `(α, β)` of [`verify_h11`].
pub fn certify_exponential(scn: &Scenario, epsilon: f64, kind: CertificateKind) -> Result<DecayCertificate> {
    let fit = verify_h11(&scn.delay, scn.horizon, 10_000);
    if fit.verdict != Verdict::Holds {
        return Err(Error::NoCertificate("no affine lower bound on the iteration counter".into()));
    }
    certify_exponential_with(scn, epsilon, kind, fit.alpha, fit.beta)
}

/// Same with `(α, β)` supplied, e.g. from a known bound `𝐧(t) ≥ αt + β`.
pub fn certify_exponential_with(
    scn: &Scenario,
    epsilon: f64,
    kind: CertificateKind,
    alpha: f64,
    beta: f64,
) -> Result<DecayCertificate> {
    if kind == CertificateKind::LpExp {
        return Err(Error::Invalid("use certify_exponential_lp".into()));
    }
    if !(epsilon > 0.0) || !(alpha > 0.0) {
        return Err(Error::Invalid("need epsilon > 0 and alpha > 0".into()));
    }
    let rho = check_rho(&scn.matrix)?;
    let eps = epsilon.min(0.5 * (1.0 - rho));
    let (norm, op) = build_norm(&scn.matrix, eps)?;
    let mut c = op.powf(beta);
    let gamma = -alpha * op.ln();
    let tau_max = scn.delay.tau_max();
    if kind == CertificateKind::SupWindowExp {
        let m = tau_max.ok_or_else(|| Error::NoCertificate("window certificate needs a bounded delay".into()))?;
        c = c.max(1.0) * (gamma * m).exp();
    }
    Ok(DecayCertificate {
        kind,
        c,
        gamma,
        euclidean_equivalence: norm.euclidean_equivalence(),
        norm,
        inputs: CertificateInputs { alpha: Some(alpha), beta: Some(beta), tau_max, phi_sup: None, p: None, operator_norm: op },
    })
}

/// Certificate for `‖x_t‖_{Lp}^p ≤ C e^{−γt}·‖x₀‖^p`, from `q = ‖φ‖∞·|A|_P^p < 1`.
pub fn certify_exponential_lp(scn: &Scenario, p: f64, epsilon: f64) -> Result<DecayCertificate> {
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::Invalid("need 1 <= p < inf".into()));
    }
    let rho = scn.matrix.spectral_radius()?;
    let check = measure::check_h6_h9_with(&scn.delay, rho, p, scn.horizon)?;
    let phi = check.phi_sup;
    if !(check.product < 1.0) {
        return Err(Error::NoCertificate(format!("q = {} >= 1", check.product)));
    }
    let tau_max = scn.delay.tau_max().ok_or_else(|| Error::NoCertificate("delay is unbounded".into()))?;
    let room = phi.powf(-1.0 / p) - rho;
    let eps = epsilon.min(0.5 * room);
    let (norm, op) = build_norm(&scn.matrix, eps)?;
    let q = phi * op.powf(p);
    if q >= 1.0 {
        return Err(Error::NoCertificate(format!("q = {q} >= 1 in the adapted norm")));
    }
    Ok(DecayCertificate {
        kind: CertificateKind::LpExp,
        c: 1.0 / (q * (1.0 - q)),
        gamma: -q.ln() / tau_max,
        euclidean_equivalence: norm.euclidean_equivalence(),
        norm,
        inputs: CertificateInputs {
            alpha: None,
            beta: None,
            tau_max: Some(tau_max),
            phi_sup: Some(phi),
            p: Some(p),
            operator_norm: op,
        },
    })
}

/// Sampled `sup |x₀(s)|_P` over the history interval.
pub fn history_sup(initial: &Signal, norm: &AdaptedNorm) -> Result<f64> {
    let left = match initial.start {
        HistoryStart::Finite(a) => a,
        HistoryStart::Unbounded => -1e3,
    };
    let mut pts: Vec<f64> = (0..=4000).map(|i| left + (initial.end - left) * i as f64 / 4000.0).collect();
    pts.pop();
    pts.extend(initial.breakpoints_in(left, initial.end).into_iter().filter(|b| *b < initial.end));
    pts.extend(initial.points.iter().map(|p| p.s));
    let mut m: f64 = 0.0;
    for s in pts {
        m = m.max(norm.norm(&initial.eval(s)?));
    }
    m = m.max(norm.norm(&initial.left_limit_at_end()?));
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDecay {
    pub gamma_hat: f64,
    pub c_hat: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_satisfied: Option<bool>,
    /// Largest `|x(t)|_P / (C e^{−γt} sup|x₀|_P)` over the samples.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
}

/// Least-squares slope and intercept of `ln y` against `t`; returns `(rate, prefactor)` with
/// `y ≈ prefactor·e^{rate·t}`.
pub fn fit_log_rate(ts: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = ts.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(t, y)| (*t, y.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::Invalid("fewer than two positive values to fit".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("degenerate fit window".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mt).exp()))
}

/// Fit of `|x(t)|` on `fit_window` and, given a certificate, a check of its bound at every sample.
pub fn empirical_decay(
    traj: &Trajectory,
    fit_window: (f64, f64),
    certificate: Option<&DecayCertificate>,
) -> Result<EmpiricalDecay> {
    let inside: Vec<_> = traj.samples.iter().filter(|s| s.t >= fit_window.0 && s.t <= fit_window.1).collect();
    let ts: Vec<f64> = inside.iter().map(|s| s.t).collect();
    let ys: Vec<f64> = inside.iter().map(|s| DVector::from_vec(s.x.clone()).norm()).collect();
    if ys.iter().all(|y| *y == 0.0) {
        return Err(Error::Invalid("trajectory vanishes on the fit window".into()));
    }
    let (rate, pre) = fit_log_rate(&ts, &ys)?;
    let (bound_satisfied, worst_ratio) = match certificate {
        Some(cert) => {
            let sup0 = history_sup(&traj.scenario.initial, &cert.norm)?;
            let mut worst: f64 = 0.0;
            for s in traj.samples.iter().filter(|s| s.t >= 0.0) {
                let lhs = cert.norm.norm(&DVector::from_vec(s.x.clone()));
                let rhs = cert.bound(s.t, sup0);
                worst = worst.max(if rhs > 0.0 { lhs / rhs } else if lhs > 0.0 { f64::INFINITY } else { 0.0 });
            }
            (Some(worst <= 1.0 + 1e-12), Some(worst))
        }
        None => (None, None),
    };
    Ok(EmpiricalDecay { gamma_hat: -rate, c_hat: pre, points: ts.len(), bound_satisfied, worst_ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Distance at the right end of the window only.
    Pointwise,
    UniformCompact,
    /// Sup over the window plus a certified tail bound beyond it.
    UniformGlobal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub sup_distance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub mode: SweepMode,
    pub window: (f64, f64),
    pub rows: Vec<SweepRow>,
    pub strictly_decreasing: bool,
    /// Nonincreasing from the second half of the table on.
    pub eventually_decreasing: bool,
}

impl SweepTable {
    /// CSV with header `k,sup_distance,tail_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,sup_distance,tail_bound\n");
        for r in &self.rows {
            let tail = r.tail_bound.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", r.k, r.sup_distance, tail));
        }
        out
    }
}

/// Sample points of the window on a 1/100 lattice, plus the right end.
fn window_points(window: (f64, f64)) -> Vec<f64> {
    let mut pts = rational_grid(window.0, window.1, 100);
    if pts.last() != Some(&window.1) {
        pts.push(window.1);
    }
    pts
}

fn value(scn: &Scenario, s: f64) -> Result<DVector<f64>> {
    if s < 0.0 {
        scn.initial.eval(s)
    } else {
        solve_representation(scn, s)
    }
}

/// Distances between the solutions for `(A_k, x₀ₖ)` and for the base scenario.
pub fn continuous_dependence_sweep(
    a_seq: &dyn Fn(usize) -> SystemMatrix,
    x0_seq: &dyn Fn(usize) -> Signal,
    base: &Scenario,
    k_max: usize,
    mode: SweepMode,
    window: (f64, f64),
) -> Result<SweepTable> {
    if !(window.1 > window.0) || window.0 < base.initial.left() {
        return Err(Error::Window { lo: window.0, hi: window.1 });
    }
    let pts = if mode == SweepMode::Pointwise { vec![window.1] } else { window_points(window) };
    let limit: Vec<DVector<f64>> = pts.iter().map(|s| value(base, *s)).collect::<Result<_>>()?;
    let tail = if mode == SweepMode::UniformGlobal {
        Some(certify_exponential(base, 1e-3, CertificateKind::PointwiseExp)?)
    } else {
        None
    };
    let base_sup = match &tail {
        Some(c) => history_sup(&base.initial, &c.norm)?,
        None => 0.0,
    };
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let mut scn = base.clone();
        scn.matrix = a_seq(k);
        scn.initial = x0_seq(k);
        scn.validate()?;
        let mut d: f64 = 0.0;
        for (s, x) in pts.iter().zip(&limit) {
            d = d.max((value(&scn, *s)? - x).norm());
        }
        // both solutions decay; bound |x_k − x| beyond the window by the sum of their bounds
        let cert_k = tail.as_ref().and_then(|_| certify_exponential(&scn, 1e-3, CertificateKind::PointwiseExp).ok());
        let tail_bound = match (&tail, cert_k) {
            (Some(cert), Some(cert_k)) => {
                let sup_k = history_sup(&scn.initial, &cert_k.norm)?;
                let m_k = cert_k.euclidean_equivalence.0;
                let m = cert.euclidean_equivalence.0;
                Some(cert_k.bound(window.1, sup_k) / m_k + cert.bound(window.1, base_sup) / m)
            }
            _ => None,
        };
        rows.push(SweepRow { k, sup_distance: d, tail_bound });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].sup_distance < w[0].sup_distance);
    let half = rows.len() / 2;
    let eventually_decreasing = rows[half..].windows(2).all(|w| w[1].sup_distance <= w[0].sup_distance);
    Ok(SweepTable { mode, window, rows, strictly_decreasing, eventually_decreasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::uniform_grid;
    use crate::solver::solve_representation_trajectory;

    fn unit_scn(a: f64, t_end: f64) -> Scenario {
        Scenario::new(
            SystemMatrix::scalar(a),
            DelaySpec::constant(1.0).unwrap(),
            Signal::constant(vec![1.0], -1.0),
            t_end,
            uniform_grid(0.0, t_end, 1001),
        )
        .unwrap()
    }

    #[test]
    fn h11_examples() {
        let c = verify_h11(&DelaySpec::constant(1.0).unwrap(), 50.0, 1000);
        assert_eq!((c.alpha, c.beta, c.verdict), (1.0, 0.0, Verdict::Holds));
        let d = verify_h11(&DelaySpec::dyadic(), 64.0, 6400);
        assert!(d.alpha > 0.0 && d.verdict == Verdict::Holds);
        assert!(d.alpha * 32.0 + d.beta >= 32.0 / 2.0 - 1.0);
        for i in 0..=6400 {
            let t = i as f64 * 0.01;
            assert!(n_of(&DelaySpec::dyadic(), t).unwrap() as f64 >= d.alpha * t + d.beta - 1e-9);
        }
        let a = verify_h11(&DelaySpec::affine(1.0, 1.0).unwrap(), 50.0, 1000);
        assert_eq!(a.verdict, Verdict::Fails);
    }

    #[test]
    fn pointwise_certificate_constants() {
        let cert = certify_exponential(&unit_scn(0.5, 10.0), 0.1, CertificateKind::PointwiseExp).unwrap();
        assert!((cert.c - 1.0).abs() < 1e-12);
        assert!((cert.gamma - 2f64.ln()).abs() < 1e-12);
        let mut dy = unit_scn(0.5, 64.0);
        dy.delay = DelaySpec::dyadic();
        let cert = certify_exponential_with(&dy, 0.1, CertificateKind::PointwiseExp, 0.5, -1.0).unwrap();
        assert!((cert.c - 2.0).abs() < 1e-12);
        assert!((cert.gamma - 0.5 * 2f64.ln()).abs() < 1e-12);
        let w = certify_exponential(&unit_scn(0.5, 10.0), 0.1, CertificateKind::SupWindowExp).unwrap();
        assert!((w.c - 2.0).abs() < 1e-12);
    }

    #[test]
    fn no_certificate_when_rho_is_one() {
        assert!(matches!(
            certify_exponential(&unit_scn(1.0, 10.0), 0.1, CertificateKind::PointwiseExp),
            Err(Error::NoCertificate(_))
        ));
    }

    #[test]
    fn nilpotent_certificate() {
        let mut scn = unit_scn(0.5, 10.0);
        scn.matrix = SystemMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        scn.initial = Signal::constant(vec![1.0, 1.0], -1.0);
        let cert = certify_exponential(&scn, 0.1, CertificateKind::PointwiseExp).unwrap();
        assert!(cert.inputs.operator_norm <= 0.1 + 1e-12);
        let traj = solve_representation_trajectory(&scn).unwrap();
        assert!(traj.samples.iter().filter(|s| s.t >= 1.0).all(|s| s.x == vec![0.0, 0.0]));
    }

    #[test]
    fn lp_certificate() {
        let cert = certify_exponential_lp(&unit_scn(0.5, 10.0), 1.0, 0.1).unwrap();
        assert!((cert.c - 4.0).abs() < 1e-12);
        assert!((cert.gamma - 2f64.ln()).abs() < 1e-12);
        let mut bad = unit_scn(0.5, 10.0);
        bad.delay = DelaySpec::affine(0.75, 1.0).unwrap();
        match certify_exponential_lp(&bad, 1.0, 0.1) {
            Err(Error::NoCertificate(msg)) => assert!(msg.contains("q = 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn decay_fit_on_unit_delay() {
        let scn = unit_scn(0.5, 30.0);
        let traj = solve_representation_trajectory(&scn).unwrap();
        let cert = certify_exponential(&scn, 0.1, CertificateKind::PointwiseExp).unwrap();
        let fit = empirical_decay(&traj, (0.0, 30.0), Some(&cert)).unwrap();
        assert!((fit.gamma_hat / 2f64.ln() - 1.0).abs() < 0.05);
        assert_eq!(fit.bound_satisfied, Some(true));
    }

    #[test]
    fn hull_minorant() {
        let pts = [(0.0, 1.0), (1.0, 0.0), (2.0, 1.0), (3.0, 3.0)];
        assert_eq!(minorant_at(&pts, 1.5), (1.0, -1.0));
    }

    #[test]
    fn constant_sequence_sweep_is_zero() {
        let base = unit_scn(0.5, 10.0);
        let t = continuous_dependence_sweep(
            &|_| SystemMatrix::scalar(0.5),
            &|_| Signal::constant(vec![1.0], -1.0),
            &base,
            5,
            SweepMode::UniformCompact,
            (-1.0, 10.0),
        )
        .unwrap();
        assert!(t.rows.iter().all(|r| r.sup_distance == 0.0));
    }
}
