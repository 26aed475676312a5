//! Delay descriptors `τ: ℝ₊ → (0, ∞)` and the delayed-argument map `σ₁(t) = t − τ(t)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transport::{CharacteristicMaps, TransportField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    LeftConstant,
}

/// One affine piece: `τ(t) = value + slope·(t − start)` on `[start, next start)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub value: f64,
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DelayKind {
    Constant {
        value: f64,
    },
    /// `τ(t) = slope·t + intercept`.
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `breakpoints[0] = 0`; the last segment extends to infinity.
    PiecewiseAffine {
        breakpoints: Vec<f64>,
        segments: Vec<Segment>,
    },
    /// `τ(t) = k` on `[2ᵏ, 2ᵏ + 1)` for `k ≥ 1`, `1` elsewhere.
    DyadicSpike,
    /// `τ(t) = ⌊t⌋ + 1`.
    FloorShift,
    /// `τ(0) = at_zero`, `τ(t) = ratio·t` for `t > 0`.
    Proportional {
        ratio: f64,
        at_zero: f64,
    },
    /// Values on a grid starting at 0; the last value is held beyond the grid.
    Tabulated {
        grid: Vec<f64>,
        values: Vec<f64>,
        interpolation: Interpolation,
    },
    /// `τ(t) = t − R(t, 1)` for a transport speed field.
    TransportInduced {
        field: TransportField,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ode_step: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root_tol: Option<f64>,
    },
}

/// Whether `σ₁` is nondecreasing on `ℝ₊`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Increasing,
    Not,
    Unknown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DelayRepr {
    #[serde(flatten)]
    kind: DelayKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared_tau_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared_tau_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DelayRepr", into = "DelayRepr")]
pub struct DelaySpec {
    kind: DelayKind,
    tau_min: Option<f64>,
    tau_max: Option<f64>,
    sigma1_monotone: Monotonicity,
    user_min: Option<f64>,
    user_max: Option<f64>,
    maps: Option<Arc<CharacteristicMaps>>,
}

impl PartialEq for DelaySpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.user_min == other.user_min && self.user_max == other.user_max
    }
}

impl TryFrom<DelayRepr> for DelaySpec {
    type Error = Error;
    fn try_from(r: DelayRepr) -> Result<Self> {
        Self::with_declared(r.kind, r.declared_tau_min, r.declared_tau_max)
    }
}

impl From<DelaySpec> for DelayRepr {
    fn from(d: DelaySpec) -> Self {
        DelayRepr { kind: d.kind, declared_tau_min: d.user_min, declared_tau_max: d.user_max }
    }
}

fn positive_finite(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

impl DelaySpec {
    pub fn new(kind: DelayKind) -> Result<Self> {
        Self::with_declared(kind, None, None)
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(DelayKind::Constant { value: c })
    }

    pub fn affine(slope: f64, intercept: f64) -> Result<Self> {
        Self::new(DelayKind::Affine { slope, intercept })
    }

    pub fn dyadic() -> Self {
        Self::new(DelayKind::DyadicSpike).expect("closed form")
    }

    pub fn piecewise(breakpoints: Vec<f64>, segments: Vec<Segment>) -> Result<Self> {
        Self::new(DelayKind::PiecewiseAffine { breakpoints, segments })
    }

    pub fn proportional(ratio: f64, at_zero: f64) -> Result<Self> {
        Self::new(DelayKind::Proportional { ratio, at_zero })
    }

    pub fn transport(field: TransportField) -> Result<Self> {
        Self::new(DelayKind::TransportInduced { field, ode_step: None, root_tol: None })
    }

    /// Builds a delay; declared bounds must agree with the analytic (or tabulated) ones.
    pub fn with_declared(kind: DelayKind, declared_min: Option<f64>, declared_max: Option<f64>) -> Result<Self> {
        let (tau_min, tau_max, mono, maps) = analyze(&kind)?;
        if let Some(m) = declared_min {
            let actual = tau_min.unwrap_or(0.0);
            if !positive_finite(m) || m > actual * (1.0 + 1e-12) {
                return Err(Error::Invalid(format!(
                    "declared tau_min {m} exceeds the actual infimum {actual}"
                )));
            }
        }
        if let Some(m) = declared_max {
            match tau_max {
                Some(actual) if positive_finite(m) && m >= actual * (1.0 - 1e-12) => {}
                other => {
                    return Err(Error::Invalid(format!(
                        "declared tau_max {m} is below the actual supremum {other:?}"
                    )))
                }
            }
        }
        Ok(Self {
            kind,
            tau_min: declared_min.or(tau_min),
            tau_max: declared_max.or(tau_max),
            sigma1_monotone: mono,
            user_min: declared_min,
            user_max: declared_max,
            maps,
        })
    }

    pub fn kind(&self) -> &DelayKind {
        &self.kind
    }

    pub fn tau_min(&self) -> Option<f64> {
        self.tau_min
    }

    pub fn tau_max(&self) -> Option<f64> {
        self.tau_max
    }

    pub fn sigma1_monotone(&self) -> Monotonicity {
        self.sigma1_monotone
    }

    /// Orbit-length bound for delays whose `σ₁` leaves `(0, ∞)` in one step although
    /// `inf τ = 0` (the proportional family with ratio ≥ 1).
    pub fn finite_orbit_bound(&self) -> Option<usize> {
        match self.kind {
            DelayKind::Proportional { ratio, .. } if ratio >= 1.0 => Some(3),
            _ => None,
        }
    }

    pub fn maps(&self) -> Option<&CharacteristicMaps> {
        self.maps.as_deref()
    }

    /// `τ(t)` for `t ≥ 0`.
    pub fn tau(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(t));
        }
        let v = match &self.kind {
            DelayKind::Constant { value } => *value,
            DelayKind::Affine { slope, intercept } => slope * t + intercept,
            DelayKind::PiecewiseAffine { breakpoints, segments } => {
                let i = breakpoints.partition_point(|b| *b <= t) - 1;
                segments[i].value + segments[i].slope * (t - breakpoints[i])
            }
            DelayKind::DyadicSpike => match dyadic_exponent(t) {
                Some(k) if k >= 1 && t < 2f64.powi(k) + 1.0 => k as f64,
                _ => 1.0,
            },
            DelayKind::FloorShift => t.floor() + 1.0,
            DelayKind::Proportional { ratio, at_zero } => {
                if t == 0.0 {
                    *at_zero
                } else {
                    ratio * t
                }
            }
            DelayKind::Tabulated { grid, values, interpolation } => tabulated(grid, values, *interpolation, t),
            DelayKind::TransportInduced { .. } => {
                let maps = self.maps.as_ref().expect("maps built at construction");
                maps.induced_delay(t)?
            }
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveDelay { t, value: v });
        }
        Ok(v)
    }

    /// `σ₁(t) = t − τ(t)`, with closed forms where rounding would otherwise blur exact values.
    pub fn sigma1(&self, t: f64) -> Result<f64> {
        match &self.kind {
            DelayKind::Affine { slope, intercept } if t >= 0.0 => Ok((1.0 - slope) * t - intercept),
            DelayKind::Proportional { ratio, .. } if t > 0.0 => Ok((1.0 - ratio) * t),
            _ => Ok(t - self.tau(t)?),
        }
    }

    /// Points in `[a, b]` where the closed form of `τ` changes (jumps or kinks).
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let a = a.max(0.0);
        let mut out = Vec::new();
        if b < a {
            return out;
        }
        match &self.kind {
            DelayKind::PiecewiseAffine { breakpoints, .. } => {
                out.extend(breakpoints.iter().copied().filter(|p| *p >= a && *p <= b))
            }
            DelayKind::Tabulated { grid, .. } => out.extend(grid.iter().copied().filter(|p| *p >= a && *p <= b)),
            DelayKind::DyadicSpike => {
                let mut k = 2;
                while 2f64.powi(k) <= b {
                    for p in [2f64.powi(k), 2f64.powi(k) + 1.0] {
                        if p >= a && p <= b {
                            out.push(p);
                        }
                    }
                    k += 1;
                }
            }
            DelayKind::FloorShift => {
                let mut p = a.ceil().max(1.0);
                while p <= b {
                    out.push(p);
                    p += 1.0;
                }
            }
            DelayKind::Proportional { .. } if a == 0.0 => out.push(0.0),
            _ => {}
        }
        out
    }

    /// Left limit `τ(b⁻)` for `b > 0`.
    pub fn tau_left_limit(&self, b: f64) -> Result<f64> {
        match &self.kind {
            DelayKind::PiecewiseAffine { breakpoints, segments } => {
                let i = breakpoints.partition_point(|p| *p < b).max(1) - 1;
                Ok(segments[i].value + segments[i].slope * (b - breakpoints[i]))
            }
            DelayKind::Tabulated { grid, values, interpolation: Interpolation::LeftConstant } => {
                let i = grid.partition_point(|p| *p < b).max(1) - 1;
                Ok(values[i])
            }
            DelayKind::DyadicSpike | DelayKind::FloorShift => {
                let eps = b * 1e-15 + 1e-300;
                self.tau((b - eps).max(0.0))
            }
            _ => self.tau(b),
        }
    }

    /// `inf τ` over `[0, t_end]`, including left limits at jumps.
    pub fn infimum_on(&self, t_end: f64) -> f64 {
        let t_end = t_end.max(0.0);
        match &self.kind {
            DelayKind::Constant { value } => *value,
            DelayKind::Affine { slope, intercept } => intercept.min(slope * t_end + intercept),
            DelayKind::PiecewiseAffine { breakpoints, segments } => {
                let mut m = f64::INFINITY;
                for (i, s) in segments.iter().enumerate() {
                    let start = breakpoints[i];
                    if start > t_end {
                        break;
                    }
                    let end = breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t_end);
                    m = m.min(s.value).min(s.value + s.slope * (end - start));
                }
                m
            }
            DelayKind::DyadicSpike | DelayKind::FloorShift => 1.0,
            DelayKind::Proportional { at_zero, .. } => {
                if t_end > 0.0 {
                    0.0
                } else {
                    *at_zero
                }
            }
            DelayKind::Tabulated { grid, values, interpolation } => {
                let mut m = tabulated(grid, values, *interpolation, t_end);
                for (g, v) in grid.iter().zip(values) {
                    if *g > t_end {
                        break;
                    }
                    m = m.min(*v);
                }
                m
            }
            DelayKind::TransportInduced { .. } => self.tau_min.unwrap_or(0.0),
        }
    }
}

/// `⌊log₂ t⌋` for `t ≥ 1`, exact at powers of two.
pub(crate) fn dyadic_exponent(t: f64) -> Option<i32> {
    if !(t >= 1.0) || !t.is_finite() {
        return None;
    }
    let mut k = t.log2().floor() as i32;
    while 2f64.powi(k) > t {
        k -= 1;
    }
    while 2f64.powi(k + 1) <= t {
        k += 1;
    }
    Some(k)
}

fn tabulated(grid: &[f64], values: &[f64], mode: Interpolation, t: f64) -> f64 {
    let i = grid.partition_point(|g| *g <= t).max(1) - 1;
    if i + 1 >= grid.len() {
        return values[values.len() - 1];
    }
    match mode {
        Interpolation::LeftConstant => values[i],
        Interpolation::Linear => {
            let w = (t - grid[i]) / (grid[i + 1] - grid[i]);
            values[i] + w * (values[i + 1] - values[i])
        }
    }
}

type Analysis = (Option<f64>, Option<f64>, Monotonicity, Option<Arc<CharacteristicMaps>>);

fn analyze(kind: &DelayKind) -> Result<Analysis> {
    use Monotonicity::*;
    let bad = |m: &str| Err(Error::Invalid(m.to_string()));
    match kind {
        DelayKind::Constant { value } => {
            if !positive_finite(*value) {
                return bad("constant delay must be positive");
            }
            Ok((Some(*value), Some(*value), Increasing, None))
        }
        DelayKind::Affine { slope, intercept } => {
            if !positive_finite(*intercept) || !slope.is_finite() || *slope < 0.0 {
                return bad("affine delay needs intercept > 0 and slope >= 0");
            }
            let max = if *slope == 0.0 { Some(*intercept) } else { None };
            Ok((Some(*intercept), max, if *slope <= 1.0 { Increasing } else { Not }, None))
        }
        DelayKind::PiecewiseAffine { breakpoints, segments } => {
            if breakpoints.is_empty() || breakpoints.len() != segments.len() || breakpoints[0] != 0.0 {
                return bad("piecewise delay needs breakpoints starting at 0, one per segment");
            }
            if breakpoints.windows(2).any(|w| !(w[1] > w[0])) || breakpoints.iter().any(|b| !b.is_finite()) {
                return bad("piecewise breakpoints must be finite and strictly increasing");
            }
            let mut min = f64::INFINITY;
            let mut max: Option<f64> = Some(0.0);
            let mut mono = Increasing;
            for (i, s) in segments.iter().enumerate() {
                if !s.value.is_finite() || !s.slope.is_finite() {
                    return bad("piecewise segment must be finite");
                }
                let (lo, hi) = match breakpoints.get(i + 1) {
                    Some(end) => {
                        let e = s.value + s.slope * (end - breakpoints[i]);
                        if s.value.min(e) <= 0.0 {
                            return bad("piecewise delay must stay positive");
                        }
                        // an upward jump of τ is a downward jump of σ₁
                        if segments[i + 1].value > e {
                            mono = Not;
                        }
                        (s.value.min(e), Some(s.value.max(e)))
                    }
                    None => {
                        if s.value <= 0.0 || s.slope < 0.0 {
                            return bad("last piecewise segment must be positive with slope >= 0");
                        }
                        (s.value, if s.slope == 0.0 { Some(s.value) } else { None })
                    }
                };
                if s.slope > 1.0 {
                    mono = Not;
                }
                min = min.min(lo);
                max = match (max, hi) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    _ => None,
                };
            }
            Ok((Some(min), max, mono, None))
        }
        DelayKind::DyadicSpike | DelayKind::FloorShift => Ok((Some(1.0), None, Not, None)),
        DelayKind::Proportional { ratio, at_zero } => {
            if !positive_finite(*ratio) || !positive_finite(*at_zero) {
                return bad("proportional delay needs ratio > 0 and a positive value at 0");
            }
            Ok((None, None, if *ratio <= 1.0 { Increasing } else { Not }, None))
        }
        DelayKind::Tabulated { grid, values, interpolation } => {
            if grid.is_empty() || grid.len() != values.len() || grid[0] != 0.0 {
                return bad("tabulated delay needs a grid starting at 0 with one value per node");
            }
            if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|g| !g.is_finite()) {
                return bad("tabulated grid must be finite and strictly increasing");
            }
            if values.iter().any(|v| !positive_finite(*v)) {
                return bad("tabulated delay values must be positive");
            }
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(0.0, f64::max);
            let mono = match interpolation {
                Interpolation::Linear => {
                    let steep = grid
                        .windows(2)
                        .zip(values.windows(2))
                        .any(|(g, v)| (v[1] - v[0]) > (g[1] - g[0]));
                    if steep {
                        Not
                    } else {
                        Increasing
                    }
                }
                Interpolation::LeftConstant => {
                    if values.windows(2).any(|v| v[1] > v[0]) {
                        Not
                    } else {
                        Increasing
                    }
                }
            };
            Ok((Some(min), Some(max), mono, None))
        }
        DelayKind::TransportInduced { field, ode_step, root_tol } => {
            let maps = CharacteristicMaps::with_options(field.clone(), *ode_step, *root_tol)?;
            let (lo, hi) = (1.0 / field.lambda_max(), 1.0 / field.lambda_min());
            Ok((Some(lo), Some(hi), Increasing, Some(Arc::new(maps))))
        }
    }
}
