//! Fusion of point estimates: weighted arithmetic and geometric averages of
//! random variables, and the closed-form second-order statistics of the
//! arithmetic average for two correlated sources.
//!
//! The two-source variance and MSE of the arithmetic average are both the
//! quadratic `h(w; α, ρ) = 1 - 2w + w² + w²α + 2ρ√α (w - w²)` scaled by the
//! first source's variance (or MSE), with `w` the second source's weight,
//! `α` the variance (or MSE) ratio and `ρ` the correlation.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};
use crate::weights::FusionWeights;

macro_rules! open_unit_correlation {
    ($name:ident, $what:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        pub struct $name(f64);

        impl $name {
            pub fn new(value: f64) -> Result<Self> {
                if !(value > -1.0 && value < 1.0) {
                    return Err(FusionError::InvalidParameter(format!(
                        concat!($what, " must lie in (-1, 1), got {}"),
                        value
                    )));
                }
                Ok(Self(value))
            }

            pub fn value(&self) -> f64 {
                self.0
            }
        }
    };
}

macro_rules! positive_ratio {
    ($name:ident, $what:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
        pub struct $name(f64);

        impl $name {
            pub fn new(value: f64) -> Result<Self> {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(FusionError::InvalidParameter(format!(
                        concat!($what, " must be positive, got {}"),
                        value
                    )));
                }
                Ok(Self(value))
            }

            pub fn value(&self) -> f64 {
                self.0
            }
        }
    };
}

open_unit_correlation!(PairCorrelation, "correlation coefficient");
open_unit_correlation!(MseCorrelation, "MSE correlation");
positive_ratio!(VarianceRatio, "variance ratio");
positive_ratio!(MseRatio, "MSE ratio");

/// `Σ ωᵢ xᵢ`.
pub fn v_aa(values: &[f64], w: &FusionWeights) -> Result<f64> {
    w.check_len(values.len())?;
    Ok(values.iter().zip(w.as_slice()).map(|(x, w)| w * x).sum())
}

/// `Π xᵢ^ωᵢ`, evaluated as `exp(Σ ωᵢ ln xᵢ)`. Every value must be positive.
pub fn v_ga(values: &[f64], w: &FusionWeights) -> Result<f64> {
    w.check_len(values.len())?;
    if let Some(bad) = values.iter().find(|x| !(**x > 0.0)) {
        return Err(FusionError::NonPositiveValue(*bad));
    }
    let log_mean: f64 = values.iter().zip(w.as_slice()).map(|(x, w)| w * x.ln()).sum();
    Ok(log_mean.exp())
}

fn positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(FusionError::InvalidParameter(format!(
            "{name} must be positive, got {value}"
        )));
    }
    Ok(())
}

/// Variance of `ω₁X₁ + ω₂X₂` for variances `s1`, `s2` and correlation `rho`.
pub fn aa_variance_two(s1: f64, s2: f64, rho: PairCorrelation, w: &FusionWeights) -> Result<f64> {
    positive("variance", s1)?;
    positive("variance", s2)?;
    let (w1, w2) = w.as_pair()?;
    Ok(w1 * w1 * s1 + w2 * w2 * s2 + 2.0 * w1 * w2 * rho.value() * (s1 * s2).sqrt())
}

/// Variance of `Σ ωᵢXᵢ` for a full covariance matrix (`ωᵀ C ω`).
///
/// The matrix must be square, symmetric and positive semi-definite.
pub fn aa_variance_n(cov: &DMatrix<f64>, w: &FusionWeights) -> Result<f64> {
    let n = w.len();
    if cov.nrows() != n || cov.ncols() != n {
        return Err(FusionError::LengthMismatch {
            expected: n,
            got: cov.nrows().max(cov.ncols()),
        });
    }
    let scale = cov.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                return Err(FusionError::InvalidParameter(format!(
                    "covariance matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let eig = cov.clone().symmetric_eigen();
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if min < -1e-10 * scale {
            return Err(FusionError::InvalidParameter(format!(
                "covariance matrix is not positive semi-definite (eigenvalue {min})"
            )));
        }
    }
    let omega = nalgebra::DVector::from_column_slice(w.as_slice());
    Ok(omega.dot(&(cov * &omega)))
}

fn h_value(w: f64, ratio: f64, corr: f64) -> f64 {
    let root = ratio.sqrt();
    1.0 - 2.0 * w + w * w + w * w * ratio + 2.0 * corr * root * (w - w * w)
}

fn check_open_unit(w: f64) -> Result<()> {
    if !(w > 0.0 && w < 1.0) {
        return Err(FusionError::InvalidParameter(format!(
            "h(w) is defined on w in (0, 1), got {w}"
        )));
    }
    Ok(())
}

/// `h(w; α, ρ)`, the AA variance in units of the first source's variance
/// when the second source carries weight `w`.
pub fn h_function(w: f64, alpha: VarianceRatio, rho: PairCorrelation) -> Result<f64> {
    check_open_unit(w)?;
    Ok(h_value(w, alpha.value(), rho.value()))
}

/// `h(w; γ, β)`, the AA MSE in units of the first source's MSE.
pub fn h_mse_function(w: f64, gamma: MseRatio, beta: MseCorrelation) -> Result<f64> {
    check_open_unit(w)?;
    Ok(h_value(w, gamma.value(), beta.value()))
}

/// Which source takes all the weight at a boundary optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    /// `ω₁ → 1`.
    First,
    /// `ω₁ → 0`.
    Second,
}

/// Minimizer of the AA variance over the fusion weights.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimalWeights {
    Interior(FusionWeights),
    /// No interior minimum: the infimum `min(Σ₁, Σ₂)` is approached as the
    /// named source takes all the weight.
    Boundary(Endpoint),
}

/// Weights minimizing `h`, with `α = Σ₂/Σ₁`.
///
/// Interior when `ρ < α^(-1/2)`; equality falls on the boundary branch.
/// For `α < 1` the sources are swapped internally and the result mapped back.
pub fn optimal_aa_weights(alpha: VarianceRatio, rho: PairCorrelation) -> OptimalWeights {
    let a = alpha.value();
    let r = rho.value();
    if a < 1.0 {
        let swapped = optimal_aa_weights(VarianceRatio(1.0 / a), rho);
        return match swapped {
            OptimalWeights::Interior(w) => {
                OptimalWeights::Interior(FusionWeights::new(vec![w.get(1), w.get(0)]).expect("swapped weights"))
            }
            OptimalWeights::Boundary(Endpoint::First) => OptimalWeights::Boundary(Endpoint::Second),
            OptimalWeights::Boundary(Endpoint::Second) => OptimalWeights::Boundary(Endpoint::First),
        };
    }
    let root = a.sqrt();
    if r * root >= 1.0 {
        return OptimalWeights::Boundary(Endpoint::First);
    }
    let denom = 1.0 + a - 2.0 * r * root;
    let w2 = (1.0 - r * root) / denom;
    match FusionWeights::new(vec![1.0 - w2, w2]) {
        Ok(w) => OptimalWeights::Interior(w),
        // w2 underflowed to the edge of (0, 1)
        Err(_) => OptimalWeights::Boundary(Endpoint::First),
    }
}

/// Infimum of the AA variance over the fusion weights.
pub fn aa_variance_lower_bound(s1: f64, s2: f64, rho: PairCorrelation) -> Result<f64> {
    positive("variance", s1)?;
    positive("variance", s2)?;
    let (small, large) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
    let a = large / small;
    let r = rho.value();
    let root = a.sqrt();
    if r * root >= 1.0 {
        return Ok(small);
    }
    Ok(a * (1.0 - r * r) / (1.0 + a - 2.0 * r * root) * small)
}

/// MSE of `ω₁θ̂₁ + ω₂θ̂₂` from the source MSEs and their error correlation.
pub fn aa_mse_two(m1: f64, m2: f64, beta: MseCorrelation, w: &FusionWeights) -> Result<f64> {
    positive("MSE", m1)?;
    positive("MSE", m2)?;
    let (w1, w2) = w.as_pair()?;
    Ok(w1 * w1 * m1 + w2 * w2 * m2 + 2.0 * w1 * w2 * beta.value() * (m1 * m2).sqrt())
}

/// Infimum of the AA MSE over the fusion weights; same algebra as
/// [`aa_variance_lower_bound`] with MSEs in place of variances.
pub fn aa_mse_lower_bound(m1: f64, m2: f64, beta: MseCorrelation) -> Result<f64> {
    aa_variance_lower_bound(m1, m2, PairCorrelation(beta.value()))
}

/// `g(γ) = (3 - γ) / (2√γ)`.
pub fn unweighted_threshold(gamma: f64) -> f64 {
    (3.0 - gamma) / (2.0 * gamma.sqrt())
}

/// Whether the equal-weight AA has a smaller MSE than the better source,
/// i.e. `h(1/2; γ, β) < 1`, which holds iff `β < g(γ)`.
///
/// `γ` is normalized to `≥ 1` by swapping sources. Never true for `γ > 9`.
pub fn unweighted_aa_beats_best(gamma: MseRatio, beta: MseCorrelation) -> bool {
    let g = gamma.value();
    let g = if g < 1.0 { 1.0 / g } else { g };
    beta.value() < unweighted_threshold(g)
}
