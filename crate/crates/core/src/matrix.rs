use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral;

/// The square real matrix `A` of the equation, with its spectral radius cached.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SystemMatrix {
    entries: DMatrix<f64>,
    rho: OnceLock<f64>,
}

impl PartialEq for SystemMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl SystemMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.nrows() != entries.ncols() {
            return Err(Error::Invalid(format!(
                "matrix must be square and nonempty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        Ok(Self { entries, rho: OnceLock::new() })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Invalid("matrix rows must all have length d".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn scalar(a: f64) -> Self {
        Self::new(DMatrix::from_element(1, 1, a)).expect("finite scalar")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.entries.row(i).iter().copied().collect())
            .collect()
    }

    /// Spectral radius, computed once.
    pub fn spectral_radius(&self) -> Result<f64> {
        if let Some(r) = self.rho.get() {
            return Ok(*r);
        }
        let r = spectral::spectral_radius(&self.entries)?;
        Ok(*self.rho.get_or_init(|| r))
    }

    /// `A^n` by repeated squaring.
    pub fn power(&self, n: usize) -> DMatrix<f64> {
        let d = self.dim();
        let mut result = DMatrix::identity(d, d);
        let mut base = self.entries.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.entries * x
    }
}

impl TryFrom<Vec<Vec<f64>>> for SystemMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SystemMatrix> for Vec<Vec<f64>> {
    fn from(m: SystemMatrix) -> Self {
        m.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(SystemMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SystemMatrix::from_rows(&[vec![f64::NAN]]).is_err());
    }

    #[test]
    fn power_matches_repeated_product() {
        let a = SystemMatrix::from_rows(&[vec![0.3, 0.4], vec![-0.2, 0.6]]).unwrap();
        let mut naive = DMatrix::identity(2, 2);
        for n in 0..13 {
            let fast = a.power(n);
            assert!((&fast - &naive).amax() < 1e-15);
            naive = a.entries() * naive;
        }
    }

    #[test]
    fn json_roundtrip() {
        let a = SystemMatrix::from_rows(&[vec![0.1, 1.0 / 3.0], vec![0.0, -2.5e-7]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        let b: SystemMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
    }
}
