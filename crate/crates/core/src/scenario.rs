use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::delay::DelaySpec;
use crate::error::{Error, Result};
use crate::matrix::SystemMatrix;
use crate::signal::Signal;

/// Norm exponent in `[1, ∞]`; serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent(pub f64);

impl Exponent {
    pub const INF: Exponent = Exponent(f64::INFINITY);
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let p = match Raw::deserialize(d)? {
            Raw::Num(x) => x,
            Raw::Str(s) if s == "inf" || s == "infinity" => f64::INFINITY,
            Raw::Str(s) => return Err(serde::de::Error::custom(format!("bad exponent {s:?}"))),
        };
        if !(p >= 1.0) {
            return Err(serde::de::Error::custom("exponent must be >= 1"));
        }
        Ok(Exponent(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// `h(t)`.
    LargestDelay,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub p: Exponent,
    pub window: Window,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub matrix: SystemMatrix,
    pub delay: DelaySpec,
    pub initial: Signal,
    pub horizon: f64,
    pub grid: Vec<f64>,
    #[serde(default)]
    pub norms: Vec<NormRequest>,
}

impl Scenario {
    pub fn new(matrix: SystemMatrix, delay: DelaySpec, initial: Signal, horizon: f64, grid: Vec<f64>) -> Result<Self> {
        let s = Scenario { matrix, delay, initial, horizon, grid, norms: Vec::new() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::Invalid("horizon must be positive".into()));
        }
        if self.grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("grid must be strictly increasing".into()));
        }
        if self.grid.last().is_some_and(|g| *g > self.horizon) {
            return Err(Error::Invalid("grid exceeds the horizon".into()));
        }
        if self.initial.end != 0.0 {
            return Err(Error::Invalid("initial condition must end at 0".into()));
        }
        self.initial.validate()?;
        if self.initial.dim() != self.matrix.dim() {
            return Err(Error::Invalid(format!(
                "initial condition has dimension {}, matrix has {}",
                self.initial.dim(),
                self.matrix.dim()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `n + 1` points `a + (b − a)·i/n`, with the endpoints exact.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * (i as f64) / (n as f64) })
        .collect()
}

/// Multiples `i/denominator` in `[a, b]`, computed by division so integers are exact.
pub fn rational_grid(a: f64, b: f64, denominator: u32) -> Vec<f64> {
    let d = denominator as f64;
    let lo = (a * d).ceil() as i64;
    let hi = (b * d).floor() as i64;
    (lo..=hi).map(|i| i as f64 / d).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_grid_hits_integers() {
        let g = rational_grid(0.0, 3.0, 100);
        assert_eq!(g.len(), 301);
        assert_eq!(g[300], 3.0);
        assert_eq!(g[100], 1.0);
    }

    #[test]
    fn exponent_accepts_inf() {
        let r: NormRequest = serde_json::from_str(r#"{"p":"inf","window":"largest-delay"}"#).unwrap();
        assert!(r.p.0.is_infinite());
        let r: NormRequest = serde_json::from_str(r#"{"p":2,"window":{"fixed":1.5}}"#).unwrap();
        assert_eq!(r.window, Window::Fixed(1.5));
        assert!(serde_json::from_str::<NormRequest>(r#"{"p":0.5,"window":"largest-delay"}"#).is_err());
    }
}
