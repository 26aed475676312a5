//! Audit of the standing hypotheses H1–H11 for a delay, a matrix and an exponent.

use serde::{Deserialize, Serialize};

use crate::delay::{DelayKind, DelaySpec};
use crate::matrix::SystemMatrix;
use crate::measure::{self, ProductCheck};
use crate::stability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Not decidable for this class (or inside a numerical guard band).
    Undecidable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub id: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub entries: Vec<HypothesisEntry>,
}

impl HypothesisReport {
    pub fn get(&self, id: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn verdict(&self, id: &str) -> Option<Verdict> {
        self.get(id).map(|e| e.verdict)
    }
}

fn entry(id: &str, verdict: Verdict, witness: Option<f64>, note: impl Into<String>) -> HypothesisEntry {
    HypothesisEntry { id: id.into(), verdict, witness, note: note.into() }
}

/// First discontinuity of `τ` in `[0, T]`, if any.
fn first_jump(delay: &DelaySpec, t_end: f64) -> Option<f64> {
    if let DelayKind::Proportional { .. } = delay.kind() {
        // τ(0⁺) = 0 while τ(0) > 0
        return Some(0.0);
    }
    delay.breakpoints_in(0.0, t_end).into_iter().filter(|b| *b > 0.0).find(|b| {
        match (delay.tau(*b), delay.tau_left_limit(*b)) {
            (Ok(v), Ok(l)) => (v - l).abs() > 1e-12 * (1.0 + v.abs()),
            _ => true,
        }
    })
}

/// Whether `σ₁(t) → ∞`.
fn tends_to_infinity(delay: &DelaySpec) -> Verdict {
    let yes = match delay.kind() {
        DelayKind::Constant { .. } | DelayKind::DyadicSpike | DelayKind::Tabulated { .. } => true,
        DelayKind::TransportInduced { .. } => true,
        DelayKind::Affine { slope, .. } => *slope < 1.0,
        DelayKind::Proportional { ratio, .. } => *ratio < 1.0,
        DelayKind::PiecewiseAffine { segments, .. } => segments.last().map_or(false, |s| s.slope < 1.0),
        DelayKind::FloorShift => false,
    };
    if yes {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

/// One verdict per hypothesis. Closed forms are decided analytically; tabulated delays
/// get grid-level verdicts or `undecidable`.
pub fn audit_hypotheses(delay: &DelaySpec, matrix: &SystemMatrix, t_end: f64, p: Option<f64>) -> HypothesisReport {
    let tabulated = matches!(delay.kind(), DelayKind::Tabulated { .. });
    let mut entries = Vec::with_capacity(11);

    let inf = delay.infimum_on(t_end);
    entries.push(entry(
        "H1",
        if inf > 0.0 { Verdict::Holds } else { Verdict::Fails },
        Some(inf),
        "infimum of the delay on [0, T]",
    ));

    match first_jump(delay, t_end) {
        Some(b) => entries.push(entry("H2", Verdict::Fails, Some(b), "jump of the delay")),
        None => {
            let note = if tabulated { "no jump on the audit grid" } else { "continuous closed form" };
            entries.push(entry("H2", Verdict::Holds, None, note))
        }
    }

    entries.push(entry("H3", Verdict::Holds, None, "sigma1 is piecewise monotone with finitely many pieces on compacts"));

    let flat = measure::sigma1_has_flat_piece(delay).unwrap_or(false);
    if tabulated {
        entries.push(entry("H4", Verdict::Undecidable, None, "not verifiable from samples"));
        entries.push(entry("H5", Verdict::Undecidable, None, "not verifiable from samples"));
    } else {
        entries.push(entry("H4", Verdict::Holds, None, "piecewise continuous closed form"));
        entries.push(if flat {
            entry("H5", Verdict::Fails, None, "sigma1 is constant on a set of positive measure")
        } else {
            entry("H5", Verdict::Holds, None, "sigma1 has no flat piece")
        });
    }

    let check: Option<ProductCheck> = p
        .filter(|q| q.is_finite())
        .or(Some(1.0))
        .and_then(|q| measure::check_h6_h9(delay, matrix, q, t_end).ok());
    let h6 = if tabulated {
        entry("H6", Verdict::Undecidable, check.as_ref().map(|c| c.phi_sup), "depends on H4 and H5")
    } else {
        match &check {
            Some(c) => entry("H6", c.verdict_h6, Some(c.phi_sup), "bound on the push-forward density on [0, T]"),
            None => entry("H6", Verdict::Undecidable, None, "density could not be evaluated"),
        }
    };
    entries.push(h6);

    let rho = matrix.spectral_radius();
    entries.push(match rho {
        Ok(r) => entry("H7", if r < 1.0 { Verdict::Holds } else { Verdict::Fails }, Some(r), "spectral radius"),
        Err(_) => entry("H7", Verdict::Undecidable, None, "eigenvalue computation failed"),
    });

    entries.push(entry("H8", tends_to_infinity(delay), None, "limit of sigma1 at infinity"));

    let h9 = match p {
        None => entry("H9", Verdict::Undecidable, None, "no exponent given"),
        Some(q) if q.is_infinite() => entry("H9", Verdict::Fails, None, "requires p < inf"),
        Some(_) if matches!(delay.kind(), DelayKind::FloorShift) => {
            entry("H9", Verdict::Fails, None, "push-forward is not sigma-finite")
        }
        Some(_) if tabulated => {
            entry("H9", Verdict::Undecidable, check.as_ref().map(|c| c.product), "depends on H4 and H5")
        }
        Some(_) => match &check {
            Some(c) => entry("H9", c.verdict_h9, Some(c.product), "sup density times rho(A)^p"),
            None => entry("H9", Verdict::Undecidable, None, "density could not be evaluated"),
        },
    };
    entries.push(h9);

    entries.push(match delay.tau_max() {
        Some(m) => entry("H10", Verdict::Holds, Some(m), "upper bound of the delay"),
        None => entry("H10", Verdict::Fails, None, "delay is unbounded"),
    });

    let fit = stability::verify_h11(delay, t_end, 10_000);
    entries.push(entry(
        "H11",
        fit.verdict,
        Some(fit.alpha),
        format!("n(t) >= {} t + {}{}", fit.alpha, fit.beta, if fit.analytic { "" } else { " on the grid" }),
    ));

    HypothesisReport { horizon: t_end, p, entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_three_quarters() {
        let r = audit_hypotheses(&DelaySpec::affine(0.75, 1.0).unwrap(), &SystemMatrix::scalar(0.5), 100.0, Some(1.0));
        assert_eq!(r.verdict("H1"), Some(Verdict::Holds));
        assert_eq!(r.get("H1").unwrap().witness, Some(1.0));
        assert_eq!(r.verdict("H8"), Some(Verdict::Holds));
        assert_eq!(r.verdict("H10"), Some(Verdict::Fails));
        assert_eq!(r.verdict("H9"), Some(Verdict::Fails));
        assert_eq!(r.get("H9").unwrap().witness, Some(2.0));
    }

    #[test]
    fn constant_delay() {
        let r = audit_hypotheses(&DelaySpec::constant(1.0).unwrap(), &SystemMatrix::scalar(2.0), 10.0, None);
        assert_eq!(r.get("H1").unwrap().witness, Some(1.0));
        assert_eq!(r.verdict("H10"), Some(Verdict::Holds));
        assert_eq!(r.get("H10").unwrap().witness, Some(1.0));
        assert_eq!(r.verdict("H7"), Some(Verdict::Fails));
        assert_eq!(r.verdict("H11"), Some(Verdict::Holds));
    }

    #[test]
    fn vanishing_delay_fails_h1() {
        let d = DelaySpec::proportional(1.0 - (-1f64).exp(), 1.0).unwrap();
        let r = audit_hypotheses(&d, &SystemMatrix::scalar(0.5), 5.0, Some(1.0));
        assert_eq!(r.verdict("H1"), Some(Verdict::Fails));
        assert_eq!(r.get("H1").unwrap().witness, Some(0.0));
        assert_eq!(r.verdict("H2"), Some(Verdict::Fails));
    }

    #[test]
    fn dyadic_jumps_and_floor_shift() {
        let r = audit_hypotheses(&DelaySpec::dyadic(), &SystemMatrix::scalar(0.5), 64.0, Some(1.0));
        assert_eq!(r.verdict("H2"), Some(Verdict::Fails));
        assert_eq!(r.get("H2").unwrap().witness, Some(4.0));
        assert_eq!(r.verdict("H10"), Some(Verdict::Fails));
        let f = audit_hypotheses(&DelaySpec::new(DelayKind::FloorShift).unwrap(), &SystemMatrix::scalar(0.5), 8.0, Some(1.0));
        assert_eq!(f.verdict("H8"), Some(Verdict::Fails));
        assert_eq!(f.verdict("H9"), Some(Verdict::Fails));
    }

    #[test]
    fn h1_is_monotone_in_horizon() {
        let d = DelaySpec::proportional(0.5, 1.0).unwrap();
        let mut failed = false;
        for t in [0.0, 1e-9, 5.0, 9.99, 20.0] {
            let v = audit_hypotheses(&d, &SystemMatrix::scalar(0.5), t, None).verdict("H1").unwrap();
            if failed {
                assert_eq!(v, Verdict::Fails);
            }
            failed |= v == Verdict::Fails;
        }
    }
}
