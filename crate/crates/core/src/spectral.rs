//! Spectral radius, adapted norms with `|A|_P ≤ ρ(A) + ε`, and the multi-delay radius.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SystemMatrix;

const SCHUR_MAX_ITER: usize = 10_000;

fn real_schur(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .map(|s| s.unpack())
        .ok_or(Error::NoConvergence)
}

/// Eigenvalues of a real matrix, read off its real Schur form.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite matrix".into()));
    }
    let s = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    Ok(s.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn complex_spectral_radius(m: &DMatrix<Complex<f64>>) -> Result<f64> {
    if m.nrows() == 1 {
        return Ok(m[(0, 0)].norm());
    }
    let s = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    let ev = s.eigenvalues().ok_or(Error::NoConvergence)?;
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

fn operator_2norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Vector norm `|x|_P = ‖P x‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptedNorm {
    pub weight: DMatrix<f64>,
    /// `‖P A P⁻¹‖₂`, the exact induced norm of `A`.
    pub achieved_operator_norm: f64,
    pub epsilon: f64,
}

impl AdaptedNorm {
    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        (&self.weight * x).norm()
    }

    /// `(lo, hi)` with `lo·|x|₂ ≤ |x|_P ≤ hi·|x|₂`.
    pub fn euclidean_equivalence(&self) -> (f64, f64) {
        let sv = self.weight.singular_values();
        let lo = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = sv.iter().copied().fold(0.0, f64::max);
        (lo, hi)
    }

    /// Largest `|Ax|_P / |x|_P` over `probes` random directions.
    pub fn probe_operator_norm(&self, a: &DMatrix<f64>, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = a.nrows();
        let mut best: f64 = 0.0;
        for _ in 0..probes {
            let x = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let nx = self.norm(&x);
            if nx > 0.0 {
                best = best.max(self.norm(&(a * &x)) / nx);
            }
        }
        best
    }
}

/// Schur form, 2×2 blocks brought to rotation-scaling form, then block-wise diagonal scaling.
pub fn adapted_norm(a: &SystemMatrix, epsilon: f64) -> Result<AdaptedNorm> {
    if !(epsilon > 0.0) {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let a = a.entries();
    let d = a.nrows();
    let rho = spectral_radius(a)?;
    let (q, t) = real_schur(a)?;

    let mut block_of = vec![0usize; d];
    let mut m = DMatrix::<f64>::identity(d, d);
    let mut m_inv = DMatrix::<f64>::identity(d, d);
    let (mut i, mut b) = (0, 0);
    while i < d {
        if i + 1 < d && t[(i + 1, i)] != 0.0 {
            let (p, qq, r, s) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let re = 0.5 * (p + s);
            let disc = 0.25 * (p - s) * (p - s) + qq * r;
            if disc < 0.0 {
                // B [u w] = [u w] [[re, im], [−im, re]] with u + i w an eigenvector
                let im = (-disc).sqrt();
                let sblk = DMatrix::from_row_slice(2, 2, &[qq, 0.0, re - p, im]);
                let sinv = sblk.clone().try_inverse().ok_or(Error::NoConvergence)?;
                m.view_mut((i, i), (2, 2)).copy_from(&sblk);
                m_inv.view_mut((i, i), (2, 2)).copy_from(&sinv);
            }
            block_of[i] = b;
            block_of[i + 1] = b;
            i += 2;
        } else {
            block_of[i] = b;
            i += 1;
        }
        b += 1;
    }
    let base_inv = &m_inv * q.transpose();
    let target = rho + epsilon;
    let mut delta = 1.0f64;
    for _ in 0..2000 {
        let p = DMatrix::from_fn(d, d, |r, c| base_inv[(r, c)] * delta.powi(-(block_of[r] as i32)));
        if let Some(p_inv) = p.clone().try_inverse() {
            let k = &p * a * &p_inv;
            let achieved = operator_2norm(&k);
            if achieved <= target {
                return Ok(AdaptedNorm { weight: p, achieved_operator_norm: achieved, epsilon });
            }
        }
        delta *= 0.5;
    }
    Err(Error::NoConvergence)
}

/// Max of `ρ(Σ A_j e^{iθ_j})` over the uniform grid with `g` angles per axis.
pub fn rho_hale_silkowski(matrices: &[DMatrix<f64>], g: usize) -> Result<f64> {
    let n = matrices.len();
    if n == 0 {
        return Err(Error::Invalid("need at least one matrix".into()));
    }
    if g < 8 {
        return Err(Error::Invalid("need at least 8 grid points per angle".into()));
    }
    let d = matrices[0].nrows();
    if matrices.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::Invalid("matrices must share one square dimension".into()));
    }
    let phases: Vec<Complex<f64>> = (0..g)
        .map(|k| Complex::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / g as f64))
        .collect();
    let total = g.checked_pow(n as u32).ok_or_else(|| Error::Invalid("grid too large".into()))?;
    let mut best: f64 = 0.0;
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut sum = DMatrix::<Complex<f64>>::zeros(d, d);
        for (j, a) in matrices.iter().enumerate() {
            let ph = phases[idx[j]];
            sum += a.map(|v| ph * v);
        }
        best = best.max(complex_spectral_radius(&sum)?);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < g {
                break;
            }
            *slot = 0;
        }
    }
    Ok(best)
}
