//! Regulated and well-regulated functions over an enumerated family of closed forms,
//! and numerical probing of one-sided limits of compositions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed form of one piece, written in `s = t − center` where a center applies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum PieceForm {
    Constant { value: f64 },
    Affine { slope: f64, intercept: f64 },
    /// `scale·|s|^exponent`.
    Power { center: f64, exponent: f64, scale: f64 },
    /// `offset + a·s + b·s·sin(1/(k s))`, value `offset` at `s = 0`.
    LinearOscillation { center: f64, offset: f64, a: f64, b: f64, k: f64 },
    /// `scale·e^{−1/(k s)²}·sin(1/(k s))`, value 0 at `s = 0`.
    FlatOscillation { center: f64, scale: f64, k: f64 },
    /// `sign(s)`.
    Sign { center: f64 },
    SignOf { inner: Box<PieceForm> },
}

impl PieceForm {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            PieceForm::Constant { value } => *value,
            PieceForm::Affine { slope, intercept } => slope * t + intercept,
            PieceForm::Power { center, exponent, scale } => scale * (t - center).abs().powf(*exponent),
            PieceForm::LinearOscillation { center, offset, a, b, k } => {
                let s = t - center;
                if s == 0.0 {
                    *offset
                } else {
                    offset + a * s + b * s * (1.0 / (k * s)).sin()
                }
            }
            PieceForm::FlatOscillation { center, scale, k } => {
                let s = t - center;
                if s == 0.0 {
                    0.0
                } else {
                    let u = 1.0 / (k * s);
                    scale * (-u * u).exp() * u.sin()
                }
            }
            PieceForm::Sign { center } => sign(t - center),
            PieceForm::SignOf { inner } => sign(inner.eval(t)),
        }
    }

    /// `t' ↦ self(c t' + d)` for `c > 0`.
    fn reparameterize(&self, c: f64, d: f64) -> PieceForm {
        let moved = |center: f64| (center - d) / c;
        match self {
            PieceForm::Constant { value } => PieceForm::Constant { value: *value },
            PieceForm::Affine { slope, intercept } => {
                PieceForm::Affine { slope: slope * c, intercept: slope * d + intercept }
            }
            PieceForm::Power { center, exponent, scale } => {
                PieceForm::Power { center: moved(*center), exponent: *exponent, scale: scale * c.powf(*exponent) }
            }
            PieceForm::LinearOscillation { center, offset, a, b, k } => PieceForm::LinearOscillation {
                center: moved(*center),
                offset: *offset,
                a: a * c,
                b: b * c,
                k: k * c,
            },
            PieceForm::FlatOscillation { center, scale, k } => {
                PieceForm::FlatOscillation { center: moved(*center), scale: *scale, k: k * c }
            }
            PieceForm::Sign { center } => PieceForm::Sign { center: moved(*center) },
            PieceForm::SignOf { inner } => PieceForm::SignOf { inner: Box::new(inner.reparameterize(c, d)) },
        }
    }

    /// Pointwise sum when it stays inside the family.
    pub fn add(&self, other: &PieceForm) -> Option<PieceForm> {
        use PieceForm::*;
        match (self, other) {
            (Constant { value: u }, Constant { value: v }) => Some(Constant { value: u + v }),
            (Constant { value }, Affine { slope, intercept }) | (Affine { slope, intercept }, Constant { value }) => {
                Some(Affine { slope: *slope, intercept: intercept + value })
            }
            (Affine { slope: s1, intercept: i1 }, Affine { slope: s2, intercept: i2 }) => {
                Some(Affine { slope: s1 + s2, intercept: i1 + i2 })
            }
            (LinearOscillation { center, offset, a, b, k }, Affine { slope, intercept })
            | (Affine { slope, intercept }, LinearOscillation { center, offset, a, b, k }) => Some(LinearOscillation {
                center: *center,
                offset: offset + slope * center + intercept,
                a: a + slope,
                b: *b,
                k: *k,
            }),
            (LinearOscillation { center, offset, a, b, k }, Constant { value })
            | (Constant { value }, LinearOscillation { center, offset, a, b, k }) => {
                Some(LinearOscillation { center: *center, offset: offset + value, a: *a, b: *b, k: *k })
            }
            _ => None,
        }
    }

    /// Oscillation center inside `[lo, hi]`, if the form has one.
    fn center_in(&self, lo: f64, hi: f64) -> Option<f64> {
        match self {
            PieceForm::LinearOscillation { center, .. } | PieceForm::FlatOscillation { center, .. } => {
                (*center >= lo && *center <= hi).then_some(*center)
            }
            PieceForm::SignOf { inner } => inner.center_in(lo, hi),
            _ => None,
        }
    }

    /// `(regulated, well_regulated)` on `[lo, hi]`, with the offending point.
    fn classify_on(&self, lo: f64, hi: f64) -> (bool, bool, Option<f64>) {
        match self {
            PieceForm::LinearOscillation { a, b, .. } => match self.center_in(lo, hi) {
                // s·(a + b sin) keeps one sign near the center iff |a| > |b|
                Some(c) if a.abs() <= b.abs() && *b != 0.0 => (true, false, Some(c)),
                _ => (true, true, None),
            },
            PieceForm::FlatOscillation { scale, .. } => match self.center_in(lo, hi) {
                Some(c) if *scale != 0.0 => (true, false, Some(c)),
                _ => (true, true, None),
            },
            PieceForm::SignOf { inner } => match inner.as_ref() {
                PieceForm::LinearOscillation { a, b, .. } => match inner.center_in(lo, hi) {
                    Some(c) if a.abs() <= b.abs() && *b != 0.0 => (false, false, Some(c)),
                    _ => (true, true, None),
                },
                PieceForm::FlatOscillation { scale, .. } => match inner.center_in(lo, hi) {
                    Some(c) if *scale != 0.0 => (false, false, Some(c)),
                    _ => (true, true, None),
                },
                other => other.classify_on(lo, hi),
            },
            _ => (true, true, None),
        }
    }

    fn finite_on(&self, lo: f64, hi: f64) -> bool {
        match self {
            PieceForm::Power { center, exponent, .. } if *exponent < 0.0 => !(*center > lo && *center < hi),
            PieceForm::LinearOscillation { k, .. } | PieceForm::FlatOscillation { k, .. } => *k != 0.0,
            PieceForm::SignOf { inner } => inner.finite_on(lo, hi),
            _ => true,
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Function on `[breakpoints[0], breakpoints[n]]`; piece `i` covers `[bᵢ, bᵢ₊₁)`, the last one
/// also its right end. `values` override single points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseFunction {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<PieceForm>,
    #[serde(default)]
    pub values: Vec<(f64, f64)>,
}

impl PiecewiseFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<PieceForm>) -> Result<Self> {
        if breakpoints.len() != pieces.len() + 1 || pieces.is_empty() {
            return Err(Error::Invalid("need one more breakpoint than pieces".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::Invalid("breakpoints must be finite and strictly increasing".into()));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !p.finite_on(breakpoints[i], breakpoints[i + 1]) {
                return Err(Error::Invalid(format!("piece {i} is not finite on its interval")));
            }
        }
        Ok(PiecewiseFunction { breakpoints, pieces, values: Vec::new() })
    }

    pub fn single(a: f64, b: f64, piece: PieceForm) -> Result<Self> {
        Self::new(vec![a, b], vec![piece])
    }

    pub fn identity(a: f64, b: f64) -> Self {
        Self::single(a, b, PieceForm::Affine { slope: 1.0, intercept: 0.0 }).expect("valid interval")
    }

    pub fn with_value(mut self, t: f64, v: f64) -> Self {
        self.values.push((t, v));
        self
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let (a, b) = self.domain();
        if !(t >= a && t <= b) {
            return Err(Error::Domain(t));
        }
        if let Some((_, v)) = self.values.iter().find(|(s, _)| *s == t) {
            return Ok(*v);
        }
        let i = (self.breakpoints.partition_point(|p| *p <= t) - 1).min(self.pieces.len() - 1);
        Ok(self.pieces[i].eval(t))
    }

    /// `t' ↦ f(c t' + d)` on the preimage of the domain, `c > 0`.
    pub fn reparameterize(&self, c: f64, d: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::Invalid("reparameterization needs c > 0".into()));
        }
        Ok(PiecewiseFunction {
            breakpoints: self.breakpoints.iter().map(|b| (b - d) / c).collect(),
            pieces: self.pieces.iter().map(|p| p.reparameterize(c, d)).collect(),
            values: self.values.iter().map(|(t, v)| ((t - d) / c, *v)).collect(),
        })
    }

    /// Pointwise sum over identical breakpoints.
    pub fn sum(&self, other: &PiecewiseFunction) -> Result<Self> {
        if self.breakpoints != other.breakpoints {
            return Err(Error::Invalid("sum needs identical breakpoints".into()));
        }
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(p, q)| p.add(q).ok_or_else(|| Error::Invalid("sum leaves the closed-form family".into())))
            .collect::<Result<Vec<_>>>()?;
        let mut values = Vec::new();
        for (t, _) in self.values.iter().chain(&other.values) {
            if !values.iter().any(|(s, _): &(f64, f64)| s == t) {
                values.push((*t, self.eval(*t)? + other.eval(*t)?));
            }
        }
        Ok(PiecewiseFunction { breakpoints: self.breakpoints.clone(), pieces, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regulated: bool,
    pub well_regulated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
}

/// Analytic classification over the family. Jumps between pieces keep a function
/// well-regulated; only oscillation centers can break either property.
pub fn classify(f: &PiecewiseFunction) -> Classification {
    let mut out = Classification { regulated: true, well_regulated: true, witness: None };
    for (i, p) in f.pieces.iter().enumerate() {
        let (r, w, at) = p.classify_on(f.breakpoints[i], f.breakpoints[i + 1]);
        if !r && out.regulated {
            out = Classification { regulated: false, well_regulated: false, witness: at };
        } else if !w && out.well_regulated {
            out.well_regulated = false;
            out.witness = at;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitVerdict {
    Exists,
    DivergesOscillating,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub limit_exists: LimitVerdict,
    /// `(offset, value)` pairs, offset `2^{−k}·spread`.
    pub sampled_values: Vec<(f64, f64)>,
}

pub const CAUCHY_TOL: f64 = 1e-9;
pub const SEPARATION: f64 = 1e-3;

/// Samples `(f∘φ)(t0 ± 2^{−k}·spread)` for `k = 1..=depth` and judges the one-sided limit.
pub fn composition_probe(
    f: &PiecewiseFunction,
    phi: &PiecewiseFunction,
    t0: f64,
    side: Side,
    depth: usize,
    spread: f64,
) -> Result<ProbeResult> {
    let sgn = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    let mut sampled_values = Vec::with_capacity(depth);
    for k in 1..=depth {
        let h = spread * 2f64.powi(-(k as i32));
        let t = t0 + sgn * h;
        sampled_values.push((h, f.eval(phi.eval(t)?)?));
    }
    let vals: Vec<f64> = sampled_values.iter().map(|p| p.1).collect();
    let tail = &vals[vals.len().saturating_sub(5)..];
    let spread_of = |xs: &[f64]| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (tlo, thi) = spread_of(tail);
    let limit_exists = if thi - tlo < CAUCHY_TOL {
        LimitVerdict::Exists
    } else {
        let half = &vals[vals.len() / 2..];
        let (lo, hi) = spread_of(half);
        let band = 0.25 * (hi - lo);
        let near_lo = half.iter().filter(|v| **v - lo <= band).count();
        let near_hi = half.iter().filter(|v| hi - **v <= band).count();
        if hi - lo > SEPARATION && near_lo >= 2 && near_hi >= 2 {
            LimitVerdict::DivergesOscillating
        } else {
            LimitVerdict::Inconclusive
        }
    };
    Ok(ProbeResult { limit_exists, sampled_values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x_sin() -> PiecewiseFunction {
        PiecewiseFunction::single(
            -1.0,
            1.0,
            PieceForm::LinearOscillation { center: 0.0, offset: 0.0, a: 0.0, b: 1.0, k: 1.0 },
        )
        .unwrap()
    }

    #[test]
    fn smooth_but_not_well_regulated() {
        let f = PiecewiseFunction::single(-1.0, 1.0, PieceForm::FlatOscillation { center: 0.0, scale: 1.0, k: 1.0 })
            .unwrap();
        assert_eq!(f.eval(0.0).unwrap(), 0.0);
        assert_eq!(classify(&f), Classification { regulated: true, well_regulated: false, witness: Some(0.0) });
        assert!(classify(&PiecewiseFunction::identity(0.0, 1.0)).well_regulated);
    }

    #[test]
    fn sum_counterexample() {
        let f = PiecewiseFunction::single(
            -1.0,
            1.0,
            PieceForm::LinearOscillation { center: 0.0, offset: 0.0, a: -1.0, b: 0.5, k: 1.0 },
        )
        .unwrap();
        let id = PiecewiseFunction::identity(-1.0, 1.0);
        assert!(classify(&f).well_regulated && classify(&id).well_regulated);
        let s = f.sum(&id).unwrap();
        assert_eq!(classify(&s), Classification { regulated: true, well_regulated: false, witness: Some(0.0) });
        assert!((s.eval(0.3).unwrap() - 0.15 * (1.0f64 / 0.3).sin()).abs() < 1e-15);
    }

    #[test]
    fn sign_of_oscillation_is_not_regulated() {
        let g = PiecewiseFunction::single(
            -1.0,
            1.0,
            PieceForm::SignOf {
                inner: Box::new(PieceForm::LinearOscillation { center: 0.0, offset: 0.0, a: 0.0, b: 1.0, k: 1.0 }),
            },
        )
        .unwrap();
        assert_eq!(classify(&g), Classification { regulated: false, well_regulated: false, witness: Some(0.0) });
        let sign = PiecewiseFunction::single(-2.0, 2.0, PieceForm::Sign { center: 0.0 }).unwrap();
        for side in [Side::Left, Side::Right] {
            let r = composition_probe(&sign, &x_sin(), 0.0, side, 40, 1.0).unwrap();
            assert_eq!(r.limit_exists, LimitVerdict::DivergesOscillating);
        }
    }

    #[test]
    fn monotone_composition_with_sign() {
        let sign = PiecewiseFunction::single(-2.0, 2.0, PieceForm::Sign { center: 0.5 }).unwrap();
        let phi = PiecewiseFunction::single(0.0, 1.0, PieceForm::Affine { slope: 2.0, intercept: -0.5 }).unwrap();
        let r = composition_probe(&sign, &phi, 0.5, Side::Right, 40, 0.25).unwrap();
        assert_eq!(r.limit_exists, LimitVerdict::Exists);
        assert_eq!(r.sampled_values.last().unwrap().1, 1.0);
    }

    #[test]
    fn reparameterization_preserves_values_and_class() {
        let f = PiecewiseFunction::single(
            -1.0,
            1.0,
            PieceForm::LinearOscillation { center: 0.2, offset: 0.1, a: 0.3, b: 0.7, k: 2.0 },
        )
        .unwrap();
        let g = f.reparameterize(3.0, -0.5).unwrap();
        for t in [-0.15, -0.1, 0.0, 0.2, 0.45] {
            assert!((g.eval(t).unwrap() - f.eval(3.0 * t - 0.5).unwrap()).abs() < 1e-12);
        }
        assert_eq!(classify(&g).well_regulated, classify(&f).well_regulated);
        assert_eq!(classify(&g).witness, Some((0.2 + 0.5) / 3.0));
    }

    #[test]
    fn rejects_blow_up_inside_piece() {
        let p = PieceForm::Power { center: 0.0, exponent: -0.5, scale: 1.0 };
        assert!(PiecewiseFunction::single(-1.0, 1.0, p.clone()).is_err());
        assert!(PiecewiseFunction::single(0.0, 1.0, p).is_ok());
    }
}
