//! Fusion of densities: closed-form AA/GA of two Gaussians with their MSE
//! decompositions, and the generic pointwise AA/GA of tabulated densities.

use serde::{Deserialize, Serialize};

use crate::density::{Gaussian1D, GridDensity, MomentSummary, MseBreakdown, TruthContext};
use crate::error::{FusionError, Result};
use crate::weights::FusionWeights;

/// Normalizers below this are treated as a vanished product.
pub const MIN_GA_NORMALIZER: f64 = 1e-12;

fn aa_moments_raw(g1: &Gaussian1D, g2: &Gaussian1D, w1: f64, w2: f64) -> MomentSummary {
    let spread = g1.mean() - g2.mean();
    MomentSummary {
        mean: w1 * g1.mean() + w2 * g2.mean(),
        variance: w1 * g1.variance() + w2 * g2.variance() + w1 * w2 * spread * spread,
    }
}

fn ga_raw(g1: &Gaussian1D, g2: &Gaussian1D, w1: f64, w2: f64) -> MomentSummary {
    let (s1, s2) = (g1.variance(), g2.variance());
    let info = w1 / s1 + w2 / s2;
    MomentSummary {
        mean: (w1 * g1.mean() / s1 + w2 * g2.mean() / s2) / info,
        variance: s1 * s2 / (w1 * s2 + w2 * s1),
    }
}

/// Mean and variance of the two-component mixture `ω₁N₁ + ω₂N₂`.
pub fn gaussian_aa_moments(g1: &Gaussian1D, g2: &Gaussian1D, w: &FusionWeights) -> Result<MomentSummary> {
    let (w1, w2) = w.as_pair()?;
    Ok(aa_moments_raw(g1, g2, w1, w2))
}

/// Normalized `N₁^ω₁ N₂^ω₂`, which is again Gaussian (covariance intersection).
pub fn gaussian_ga(g1: &Gaussian1D, g2: &Gaussian1D, w: &FusionWeights) -> Result<Gaussian1D> {
    let (w1, w2) = w.as_pair()?;
    let m = ga_raw(g1, g2, w1, w2);
    Gaussian1D::new(m.mean, m.variance)
}

/// MSE of the Gaussian AA about `truth`.
///
/// The split is per source: `variance_part = ω₁Σ₁ + ω₂Σ₂` and
/// `bias_sq_part = ω₁ξ₁² + ω₂ξ₂²` with `ξᵢ = μᵢ - θ`. This is not the
/// variance/bias split about the fused mean; the mixture spread term lands in
/// `bias_sq_part` here.
pub fn gaussian_aa_mse(
    g1: &Gaussian1D,
    g2: &Gaussian1D,
    w: &FusionWeights,
    truth: TruthContext,
) -> Result<MseBreakdown> {
    let (w1, w2) = w.as_pair()?;
    Ok(aa_mse_raw(g1, g2, w1, w2, truth.theta()))
}

fn aa_mse_raw(g1: &Gaussian1D, g2: &Gaussian1D, w1: f64, w2: f64, theta: f64) -> MseBreakdown {
    let xi1 = g1.mean() - theta;
    let xi2 = g2.mean() - theta;
    MseBreakdown::from_parts(
        w1 * g1.variance() + w2 * g2.variance(),
        w1 * xi1 * xi1 + w2 * xi2 * xi2,
    )
}

/// Intermediates of the Gaussian GA MSE: the GA mean is `θ + a·ξ₁ + b·ξ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaMseTerms {
    pub a: f64,
    pub b: f64,
    pub xi1: f64,
    pub xi2: f64,
}

pub fn ga_mse_terms(g1: &Gaussian1D, g2: &Gaussian1D, w: &FusionWeights, truth: TruthContext) -> Result<GaMseTerms> {
    let (w1, w2) = w.as_pair()?;
    Ok(ga_terms_raw(g1, g2, w1, w2, truth.theta()))
}

fn ga_terms_raw(g1: &Gaussian1D, g2: &Gaussian1D, w1: f64, w2: f64, theta: f64) -> GaMseTerms {
    let p1 = w1 / g1.variance();
    let p2 = w2 / g2.variance();
    let a = p1 / (p1 + p2);
    GaMseTerms {
        a,
        b: 1.0 - a,
        xi1: g1.mean() - theta,
        xi2: g2.mean() - theta,
    }
}

/// MSE of the Gaussian GA: `variance_part` is the GA variance and
/// `bias_sq_part = (aξ₁ + bξ₂)²`.
pub fn gaussian_ga_mse(
    g1: &Gaussian1D,
    g2: &Gaussian1D,
    w: &FusionWeights,
    truth: TruthContext,
) -> Result<MseBreakdown> {
    let (w1, w2) = w.as_pair()?;
    Ok(ga_mse_raw(g1, g2, w1, w2, truth.theta()))
}

fn ga_mse_raw(g1: &Gaussian1D, g2: &Gaussian1D, w1: f64, w2: f64, theta: f64) -> MseBreakdown {
    let t = ga_terms_raw(g1, g2, w1, w2, theta);
    let bias = t.a * t.xi1 + t.b * t.xi2;
    MseBreakdown::from_parts(ga_raw(g1, g2, w1, w2).variance, bias * bias)
}

fn check_grids(ds: &[GridDensity], w: &FusionWeights) -> Result<()> {
    let first = ds.first().ok_or(FusionError::Empty("density list"))?;
    w.check_len(ds.len())?;
    if ds.iter().any(|d| !d.same_grid(first)) {
        return Err(FusionError::GridMismatch);
    }
    if let Some(d) = ds.iter().find(|d| !d.is_normalized()) {
        return Err(FusionError::UnnormalizedDensity(d.integral()));
    }
    Ok(())
}

/// Pointwise `Σ ωᵢ fᵢ(x)` of densities sharing one grid.
pub fn grid_aa(ds: &[GridDensity], w: &FusionWeights) -> Result<GridDensity> {
    check_grids(ds, w)?;
    let n = ds[0].n_points();
    let values = (0..n)
        .map(|i| ds.iter().zip(w.as_slice()).map(|(d, w)| w * d.values()[i]).sum())
        .collect();
    GridDensity::new(ds[0].x_min(), ds[0].x_max(), values)
}

/// Pointwise `C⁻¹ Π fᵢ(x)^ωᵢ` with `0^ω = 0`; the support is the intersection
/// of the input supports.
pub fn grid_ga(ds: &[GridDensity], w: &FusionWeights) -> Result<GridDensity> {
    check_grids(ds, w)?;
    let n = ds[0].n_points();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let mut log_sum = 0.0;
            for (d, w) in ds.iter().zip(w.as_slice()) {
                let v = d.values()[i];
                if v == 0.0 {
                    return 0.0;
                }
                log_sum += w * v.ln();
            }
            log_sum.exp()
        })
        .collect();
    if values.iter().all(|v| *v == 0.0) {
        return Err(FusionError::DisjointSupports);
    }
    let product = GridDensity::new(ds[0].x_min(), ds[0].x_max(), values)?;
    let normalizer = product.integral();
    if normalizer < MIN_GA_NORMALIZER {
        return Err(FusionError::UnnormalizedDensity(normalizer));
    }
    product.normalized()
}

/// One cell of an analytic AA/GA comparison over truth and weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub theta: f64,
    pub omega1: f64,
    pub aa_mean: f64,
    pub aa_var: f64,
    pub ga_mean: f64,
    pub ga_var: f64,
    pub aa_mse: f64,
    pub ga_mse: f64,
}

/// Tabulates the closed-form AA/GA variance and MSE over every
/// `(θ, ω₁)` pair. `ω₁` may include the endpoints 0 and 1, where both rules
/// reduce to a single source.
pub fn mse_surface(g1: &Gaussian1D, g2: &Gaussian1D, thetas: &[f64], omegas: &[f64]) -> Result<Vec<SurfacePoint>> {
    if let Some(bad) = omegas.iter().find(|w| !(**w >= 0.0 && **w <= 1.0)) {
        return Err(FusionError::InvalidParameter(format!("omega1 {bad} outside [0, 1]")));
    }
    if let Some(bad) = thetas.iter().find(|t| !t.is_finite()) {
        return Err(FusionError::InvalidParameter(format!("theta {bad} is not finite")));
    }
    let mut out = Vec::with_capacity(thetas.len() * omegas.len());
    for &theta in thetas {
        for &w1 in omegas {
            let w2 = 1.0 - w1;
            let aa = aa_moments_raw(g1, g2, w1, w2);
            let ga = ga_raw(g1, g2, w1, w2);
            out.push(SurfacePoint {
                theta,
                omega1: w1,
                aa_mean: aa.mean,
                aa_var: aa.variance,
                ga_mean: ga.mean,
                ga_var: ga.variance,
                aa_mse: aa_mse_raw(g1, g2, w1, w2, theta).total,
                ga_mse: ga_mse_raw(g1, g2, w1, w2, theta).total,
            });
        }
    }
    Ok(out)
}
