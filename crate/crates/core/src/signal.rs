//! Initial conditions and trajectory segments on intervals `[a, 0)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::delay::Interpolation;
use crate::error::{Error, Result};

/// Left end of a support; `Unbounded` stands for `−∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryStart {
    Finite(f64),
    Unbounded,
}

impl HistoryStart {
    pub fn value(self) -> f64 {
        match self {
            HistoryStart::Finite(a) => a,
            HistoryStart::Unbounded => f64::NEG_INFINITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    Continuous,
    Regulated,
    Lp,
    Linf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum SignalForm {
    Constant { value: Vec<f64> },
    /// `s ↦ |s|^(−beta)·direction`.
    Power { beta: f64, direction: Vec<f64> },
    /// Scalar `s ↦ rho·|s|^alpha`.
    ScalarPowerFamily { rho: f64, alpha: f64 },
    Sampled { grid: Vec<f64>, values: Vec<Vec<f64>>, interpolation: Interpolation },
}

/// Pointwise value overriding the form at a single abscissa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub s: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    pub start: HistoryStart,
    /// Right end; the support is `[start, end)`.
    #[serde(default)]
    pub end: f64,
    #[serde(flatten)]
    pub form: SignalForm,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<PointValue>,
    pub regularity: Regularity,
}

impl Signal {
    pub fn constant(value: Vec<f64>, start: f64) -> Self {
        Signal {
            start: HistoryStart::Finite(start),
            end: 0.0,
            form: SignalForm::Constant { value },
            points: Vec::new(),
            regularity: Regularity::Continuous,
        }
    }

    pub fn sampled(grid: Vec<f64>, values: Vec<Vec<f64>>, interpolation: Interpolation) -> Result<Self> {
        let start = *grid.first().ok_or_else(|| Error::Invalid("empty sampled grid".into()))?;
        let regularity = match interpolation {
            Interpolation::Linear => Regularity::Continuous,
            Interpolation::LeftConstant => Regularity::Regulated,
        };
        let s = Signal {
            start: HistoryStart::Finite(start),
            end: 0.0,
            form: SignalForm::Sampled { grid, values, interpolation },
            points: Vec::new(),
            regularity,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_point(mut self, s: f64, value: Vec<f64>) -> Self {
        self.points.push(PointValue { s, value });
        if self.regularity == Regularity::Continuous {
            self.regularity = Regularity::Regulated;
        }
        self
    }

    pub fn dim(&self) -> usize {
        match &self.form {
            SignalForm::Constant { value } => value.len(),
            SignalForm::Power { direction, .. } => direction.len(),
            SignalForm::ScalarPowerFamily { .. } => 1,
            SignalForm::Sampled { values, .. } => values.first().map_or(0, Vec::len),
        }
    }

    pub fn left(&self) -> f64 {
        self.start.value()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Invalid("signal has dimension 0".into()));
        }
        if let HistoryStart::Finite(a) = self.start {
            if !(a < self.end) {
                return Err(Error::Invalid("signal support is empty".into()));
            }
        } else if !matches!(self.form, SignalForm::Constant { .. } | SignalForm::Power { .. }) {
            return Err(Error::Invalid("only constant and power forms may have an unbounded history".into()));
        }
        match &self.form {
            SignalForm::Constant { value } if value.iter().any(|v| !v.is_finite()) => {
                return Err(Error::Invalid("non-finite constant signal".into()))
            }
            SignalForm::Power { beta, .. } if !beta.is_finite() => {
                return Err(Error::Invalid("non-finite power exponent".into()))
            }
            SignalForm::Power { beta, .. } if *beta > 0.0 && !matches!(self.regularity, Regularity::Lp) => {
                return Err(Error::Invalid("an unbounded power signal must carry the Lp tag".into()))
            }
            SignalForm::Sampled { grid, values, interpolation } => {
                if grid.len() != values.len() || grid.is_empty() {
                    return Err(Error::Invalid("sampled signal needs one value per grid point".into()));
                }
                if grid.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Invalid("sampled grid must be strictly increasing".into()));
                }
                if values.iter().any(|v| v.len() != d || v.iter().any(|x| !x.is_finite())) {
                    return Err(Error::Invalid("sampled values must be finite with a common dimension".into()));
                }
                if self.regularity == Regularity::Continuous && *interpolation == Interpolation::LeftConstant {
                    for (i, w) in values.windows(2).enumerate() {
                        let jump = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                        if jump > 1e-12 {
                            return Err(Error::Invalid(format!(
                                "signal tagged continuous jumps at grid point {}",
                                grid[i + 1]
                            )));
                        }
                    }
                }
            }
            _ => {}
        }
        if self.points.iter().any(|p| p.value.len() != d) {
            return Err(Error::Invalid("point value dimension mismatch".into()));
        }
        Ok(())
    }

    /// Value at `s` in `[start, end)`; `s = end` is allowed and returns the left limit.
    pub fn eval(&self, s: f64) -> Result<DVector<f64>> {
        if s < self.left() || s > self.end || s.is_nan() {
            return Err(Error::HistoryOutOfRange { s, left: self.left() });
        }
        if let Some(p) = self.points.iter().find(|p| p.s == s) {
            return Ok(DVector::from_vec(p.value.clone()));
        }
        self.eval_form(s)
    }

    /// Left limit at `end`.
    pub fn left_limit_at_end(&self) -> Result<DVector<f64>> {
        match &self.form {
            SignalForm::Sampled { grid, values, interpolation: Interpolation::LeftConstant } => {
                let i = grid.partition_point(|g| *g < self.end).max(1) - 1;
                Ok(DVector::from_vec(values[i].clone()))
            }
            _ => self.eval_form(self.end),
        }
    }

    fn eval_form(&self, s: f64) -> Result<DVector<f64>> {
        Ok(match &self.form {
            SignalForm::Constant { value } => DVector::from_vec(value.clone()),
            SignalForm::Power { beta, direction } => {
                DVector::from_vec(direction.clone()) * s.abs().powf(-beta)
            }
            SignalForm::ScalarPowerFamily { rho, alpha } => DVector::from_element(1, rho * s.abs().powf(*alpha)),
            SignalForm::Sampled { grid, values, interpolation } => {
                let i = grid.partition_point(|g| *g <= s).max(1) - 1;
                if i + 1 >= grid.len() || *interpolation == Interpolation::LeftConstant {
                    DVector::from_vec(values[i.min(values.len() - 1)].clone())
                } else {
                    let w = (s - grid[i]) / (grid[i + 1] - grid[i]);
                    let a = DVector::from_vec(values[i].clone());
                    let b = DVector::from_vec(values[i + 1].clone());
                    &a + (&b - &a) * w
                }
            }
        })
    }

    /// Abscissae in `[a, b]` where the signal may jump or kink.
    pub fn breakpoints_in(&self, a: f64, b: f64) -> Vec<f64> {
        let mut out: Vec<f64> = self.points.iter().map(|p| p.s).filter(|s| *s >= a && *s <= b).collect();
        if let SignalForm::Sampled { grid, .. } = &self.form {
            out.extend(grid.iter().copied().filter(|s| *s >= a && *s <= b));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_with_point_override() {
        let s = Signal::constant(vec![1.0], -1.0).with_point(-1.0, vec![0.0]);
        assert_eq!(s.eval(-1.0).unwrap()[0], 0.0);
        assert_eq!(s.eval(-0.999).unwrap()[0], 1.0);
        assert!(s.eval(-1.5).is_err());
    }

    #[test]
    fn sampled_modes() {
        let lin = Signal::sampled(vec![-1.0, 0.0], vec![vec![0.0], vec![2.0]], Interpolation::Linear).unwrap();
        assert_eq!(lin.eval(-0.25).unwrap()[0], 1.5);
        let lc = Signal::sampled(vec![-1.0, -0.5, 0.0], vec![vec![0.0], vec![2.0], vec![3.0]], Interpolation::LeftConstant)
            .unwrap();
        assert_eq!(lc.eval(-0.75).unwrap()[0], 0.0);
        assert_eq!(lc.eval(-0.5).unwrap()[0], 2.0);
        assert_eq!(lc.left_limit_at_end().unwrap()[0], 2.0);
    }

    #[test]
    fn continuous_tag_is_audited() {
        let mut s = Signal::sampled(vec![-1.0, -0.5, 0.0], vec![vec![0.0], vec![1.0], vec![1.0]], Interpolation::LeftConstant)
            .unwrap();
        s.regularity = Regularity::Continuous;
        assert!(s.validate().is_err());
    }

    #[test]
    fn unbounded_history_only_for_constant_or_power() {
        let mut s = Signal::constant(vec![1.0], -1.0);
        s.start = HistoryStart::Unbounded;
        assert!(s.validate().is_ok());
        assert_eq!(s.eval(-1e9).unwrap()[0], 1.0);
    }

    #[test]
    fn power_needs_lp_tag() {
        let mut s = Signal {
            start: HistoryStart::Finite(-1.0),
            end: 0.0,
            form: SignalForm::Power { beta: 0.5, direction: vec![1.0] },
            points: vec![],
            regularity: Regularity::Continuous,
        };
        assert!(s.validate().is_err());
        s.regularity = Regularity::Lp;
        assert!(s.validate().is_ok());
        assert!((s.eval(-0.25).unwrap()[0] - 2.0).abs() < 1e-15);
    }
}
