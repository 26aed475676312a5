//! Push-forward of Lebesgue measure under `σ₁`: histogram estimates and the bounds used
//! for the boundedness and `ρ(A)^p`-product conditions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::delay::{DelayKind, DelaySpec, Interpolation, Monotonicity};
use crate::error::{Error, Result};
use crate::hypotheses::Verdict;
use crate::matrix::SystemMatrix;

pub const DEFAULT_SEED: u64 = 0x5eed_d1ff;
/// Relative band around 1 inside which the product verdict is undecidable.
pub const GUARD_BAND: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PushforwardDensity {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    pub source_interval: (f64, f64),
    pub sup_estimate: f64,
    pub samples: usize,
    pub seed: u64,
}

impl PushforwardDensity {
    pub fn mass(&self) -> f64 {
        self.bin_edges.windows(2).zip(&self.density).map(|(w, d)| d * (w[1] - w[0])).sum()
    }

    /// Density value of the bin containing `y`, if any.
    pub fn at(&self, y: f64) -> Option<f64> {
        let i = self.bin_edges.partition_point(|e| *e <= y);
        (i >= 1 && i < self.bin_edges.len()).then(|| self.density[i - 1])
    }

    /// CSV with header `bin_left,bin_right,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density\n");
        for (w, d) in self.bin_edges.windows(2).zip(&self.density) {
            out.push_str(&format!("{},{},{}\n", w[0], w[1], d));
        }
        out
    }
}

pub fn estimate_pushforward(delay: &DelaySpec, t_end: f64, bins: usize, samples: usize) -> Result<PushforwardDensity> {
    estimate_pushforward_seeded(delay, t_end, bins, samples, DEFAULT_SEED)
}

/// Histogram of `σ₁(uᵢ)` with one jittered point per stratum of `[0, T]`.
pub fn estimate_pushforward_seeded(
    delay: &DelaySpec,
    t_end: f64,
    bins: usize,
    samples: usize,
    seed: u64,
) -> Result<PushforwardDensity> {
    if bins < 16 || samples < 10_000 || !(t_end > 0.0) {
        return Err(Error::Invalid("need bins >= 16, samples >= 1e4 and T > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = t_end / samples as f64;
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let u = (i as f64 + rng.gen::<f64>()) * width;
        ys.push(delay.sigma1(u.min(t_end))?);
    }
    let (mut lo, mut hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(*y), b.max(*y)));
    if hi - lo < 1e-12 * (1.0 + lo.abs()) {
        lo -= 5e-7;
        hi += 5e-7;
    }
    let bw = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for y in &ys {
        let k = (((y - lo) / bw) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let bin_edges: Vec<f64> = (0..=bins).map(|k| if k == bins { hi } else { lo + bw * k as f64 }).collect();
    let density: Vec<f64> = counts.iter().map(|c| *c as f64 * width / bw).collect();
    let sup_estimate = density.iter().copied().fold(0.0, f64::max);
    Ok(PushforwardDensity { bin_edges, density, source_interval: (0.0, t_end), sup_estimate, samples, seed })
}

/// Whether `σ₁` is constant on a set of positive measure (an atom of the push-forward).
pub fn sigma1_has_flat_piece(delay: &DelaySpec) -> Option<bool> {
    Some(match delay.kind() {
        DelayKind::Constant { .. } | DelayKind::DyadicSpike | DelayKind::FloorShift => false,
        DelayKind::Affine { slope, .. } => *slope == 1.0,
        DelayKind::Proportional { ratio, .. } => *ratio == 1.0,
        DelayKind::PiecewiseAffine { segments, .. } => segments.iter().any(|s| s.slope == 1.0),
        DelayKind::Tabulated { grid, values, interpolation: Interpolation::Linear } => {
            grid.windows(2).zip(values.windows(2)).any(|(g, v)| v[1] - v[0] == g[1] - g[0])
        }
        DelayKind::Tabulated { .. } => false,
        DelayKind::TransportInduced { .. } => false,
    })
}

/// Global bound on the push-forward density when it follows from the closed form:
/// `1/|σ₁′|` on injective pieces, `1/(1 − α)` when `τ′ ≤ α < 1`.
pub fn analytic_phi_bound(delay: &DelaySpec) -> Option<f64> {
    let injective = delay.sigma1_monotone() == Monotonicity::Increasing;
    match delay.kind() {
        DelayKind::Constant { .. } => Some(1.0),
        DelayKind::Affine { slope, .. } | DelayKind::Proportional { ratio: slope, .. } => {
            (*slope != 1.0).then(|| 1.0 / (1.0 - slope).abs())
        }
        DelayKind::PiecewiseAffine { segments, .. } if injective => {
            let worst = segments.iter().map(|s| s.slope).fold(f64::NEG_INFINITY, f64::max);
            (worst < 1.0).then(|| 1.0 / (1.0 - worst))
        }
        DelayKind::Tabulated { grid, values, interpolation } if injective => match interpolation {
            Interpolation::LeftConstant => Some(1.0),
            Interpolation::Linear => {
                let worst = grid
                    .windows(2)
                    .zip(values.windows(2))
                    .map(|(g, v)| (v[1] - v[0]) / (g[1] - g[0]))
                    .fold(0.0, f64::max);
                (worst < 1.0).then(|| 1.0 / (1.0 - worst))
            }
        },
        DelayKind::TransportInduced { field, .. } => Some(1.0 / (1.0 - field.tau_prime_bound())),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductCheck {
    pub phi_sup: f64,
    pub product: f64,
    pub analytic: bool,
    pub verdict_h6: Verdict,
    pub verdict_h9: Verdict,
}

pub(crate) fn product_verdict(product: f64) -> Verdict {
    if product < 1.0 - GUARD_BAND {
        Verdict::Holds
    } else if product > 1.0 + GUARD_BAND {
        Verdict::Fails
    } else {
        Verdict::Undecidable
    }
}

/// Density bound on `[0, T]` and the product `‖φ‖∞ ρ(A)^p`.
pub fn check_h6_h9(delay: &DelaySpec, a: &SystemMatrix, p: f64, t_end: f64) -> Result<ProductCheck> {
    check_h6_h9_with(delay, a.spectral_radius()?, p, t_end)
}

/// Same as [`check_h6_h9`] with the spectral quantity supplied (e.g. an adapted norm).
pub fn check_h6_h9_with(delay: &DelaySpec, radius: f64, p: f64, t_end: f64) -> Result<ProductCheck> {
    if !(p >= 1.0) || p.is_infinite() {
        return Err(Error::Invalid("the product condition needs 1 <= p < inf".into()));
    }
    let flat = sigma1_has_flat_piece(delay).unwrap_or(false);
    let (phi_sup, analytic) = if flat {
        (f64::INFINITY, true)
    } else if let Some(b) = analytic_phi_bound(delay) {
        (b, true)
    } else {
        (estimate_pushforward(delay, t_end, 256, 100_000)?.sup_estimate, false)
    };
    let product = if flat { f64::INFINITY } else { phi_sup * radius.powf(p) };
    let verdict_h6 = if flat { Verdict::Fails } else { Verdict::Holds };
    let verdict_h9 = if flat { Verdict::Fails } else { product_verdict(product) };
    Ok(ProductCheck { phi_sup, product, analytic, verdict_h6, verdict_h9 })
}
