//! Iterated delay maps `σₙ`, the iteration counter `𝐧(t)` and the largest delay `h(t)`.

use serde::{Deserialize, Serialize};

use crate::delay::{DelaySpec, Monotonicity};
use crate::error::{Error, Result};

/// Points of the audit grid used when no closed-form shortcut applies.
pub const AUDIT_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTable {
    pub query_t: f64,
    pub n_of_t: usize,
    /// `[σ₀(t), σ₁(t), …, σ_𝐧(t)(t)]`.
    pub orbit: Vec<f64>,
    pub landed_in_history: bool,
}

impl IterationTable {
    /// `σ_𝐧(t)(t)`, the point where the history is read.
    pub fn landing(&self) -> f64 {
        *self.orbit.last().expect("orbit is never empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LargestDelayMethod {
    MonotoneShortcut,
    HorizonScan { scan_horizon: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LargestDelayValue {
    pub t: f64,
    pub h_of_t: f64,
    pub method: LargestDelayMethod,
}

/// `σ_k(t)` when `t ∈ D_k`, `None` otherwise.
pub fn iterate_sigma(delay: &DelaySpec, t: f64, k: usize) -> Result<Option<f64>> {
    let mut s = t;
    for _ in 0..k {
        if s < 0.0 {
            return Ok(None);
        }
        s = delay.sigma1(s)?;
    }
    Ok(Some(s))
}

/// Orbit of `t` under `σ₁` until it leaves `ℝ₊`. `σ₁(t) = 0` stays in `D₁`.
pub fn iteration_count(delay: &DelaySpec, t: f64) -> Result<IterationTable> {
    if t.is_nan() {
        return Err(Error::Domain(t));
    }
    if t < 0.0 {
        return Ok(IterationTable { query_t: t, n_of_t: 0, orbit: vec![t], landed_in_history: true });
    }
    let inf = delay.infimum_on(t);
    let cap = if inf > 0.0 {
        2 * ((t / inf).ceil() as usize + 1)
    } else {
        delay.finite_orbit_bound().ok_or(Error::NoPositiveInfimum { t })?
    };
    let mut orbit = Vec::with_capacity(cap.min(1 << 16) + 1);
    let mut s = t;
    orbit.push(s);
    while s >= 0.0 {
        if orbit.len() > cap {
            return Err(Error::StepCap { t, cap });
        }
        s = delay.sigma1(s)?;
        orbit.push(s);
    }
    Ok(IterationTable { query_t: t, n_of_t: orbit.len() - 1, orbit, landed_in_history: true })
}

/// `𝐧(t)` alone.
pub fn n_of(delay: &DelaySpec, t: f64) -> Result<usize> {
    Ok(iteration_count(delay, t)?.n_of_t)
}

/// `h(t) = t − inf_{s ≥ t} σ₁(s)`, exact when `σ₁` is nondecreasing, otherwise a scan over
/// `[t, scan_horizon]` (grid, breakpoints and left limits), which bounds `h(t)` from below.
pub fn largest_delay(delay: &DelaySpec, t: f64, scan_horizon: f64) -> Result<LargestDelayValue> {
    if delay.sigma1_monotone() == Monotonicity::Increasing {
        return Ok(LargestDelayValue { t, h_of_t: delay.tau(t)?, method: LargestDelayMethod::MonotoneShortcut });
    }
    let hi = scan_horizon.max(t);
    let mut min = delay.sigma1(t)?;
    for i in 1..=AUDIT_POINTS {
        let s = t + (hi - t) * i as f64 / AUDIT_POINTS as f64;
        min = min.min(delay.sigma1(s)?);
    }
    for b in delay.breakpoints_in(t, hi) {
        min = min.min(delay.sigma1(b)?);
        if b > t {
            min = min.min(b - delay.tau_left_limit(b)?);
        }
    }
    Ok(LargestDelayValue {
        t,
        h_of_t: t - min,
        method: LargestDelayMethod::HorizonScan { scan_horizon: hi },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterate_examples() {
        let c = DelaySpec::constant(1.0).unwrap();
        assert_eq!(iterate_sigma(&c, 3.5, 2).unwrap(), Some(1.5));
        assert_eq!(iterate_sigma(&c, -0.3, 0).unwrap(), Some(-0.3));
        let a = DelaySpec::affine(1.0, 1.0).unwrap();
        assert_eq!(iterate_sigma(&a, 5.0, 1).unwrap(), Some(-1.0));
        assert_eq!(iterate_sigma(&a, 5.0, 2).unwrap(), None);
    }

    #[test]
    fn count_examples() {
        let c = DelaySpec::constant(1.0).unwrap();
        let tab = iteration_count(&c, 3.5).unwrap();
        assert_eq!(tab.n_of_t, 4);
        assert_eq!(tab.landing(), -0.5);
        assert_eq!(n_of(&c, 3.0).unwrap(), 4);
        assert_eq!(n_of(&DelaySpec::dyadic(), 10.0).unwrap(), 8);
        let neg = iteration_count(&c, -1.0).unwrap();
        assert_eq!((neg.n_of_t, neg.orbit), (0, vec![-1.0]));
    }

    #[test]
    fn no_positive_infimum_is_reported() {
        let d = DelaySpec::proportional(0.5, 1.0).unwrap();
        assert!(matches!(iteration_count(&d, 1.0), Err(Error::NoPositiveInfimum { .. })));
        assert_eq!(n_of(&d, 0.0).unwrap(), 1);
        // ratio 1: σ₁(t) = 0 for t > 0, then σ₁(0) = −1
        let e = DelaySpec::proportional(1.0, 1.0).unwrap();
        assert_eq!(iteration_count(&e, 2.5).unwrap().orbit, vec![2.5, 0.0, -1.0]);
    }

    #[test]
    fn largest_delay_examples() {
        let a = DelaySpec::affine(1.0, 1.0).unwrap();
        assert_eq!(largest_delay(&a, 0.0, 10.0).unwrap().h_of_t, 1.0);
        let b = DelaySpec::affine(0.75, 1.0).unwrap();
        let h = largest_delay(&b, 5.0, 10.0).unwrap();
        assert_eq!((h.h_of_t, h.method), (4.75, LargestDelayMethod::MonotoneShortcut));
        assert_eq!(largest_delay(&DelaySpec::constant(1.0).unwrap(), 7.0, 8.0).unwrap().h_of_t, 1.0);
    }

    #[test]
    fn dyadic_largest_delay_sees_the_spikes() {
        // σ₁(2ᵏ) = 2ᵏ − k is the running minimum just after each spike starts
        let d = DelaySpec::dyadic();
        let h = largest_delay(&d, 3.5, 20.0).unwrap();
        assert_eq!(h.h_of_t, 3.5 - 2.0);
        assert!(matches!(h.method, LargestDelayMethod::HorizonScan { .. }));
    }
}
