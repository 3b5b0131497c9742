//! Scalar Gaussians, tabulated densities and their first two moments.
//!
//! Tabulated densities live on a uniform grid and are integrated with the
//! trapezoidal rule. A value of exactly zero marks a grid point outside the
//! support; there is no epsilon floor.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FusionError, Result};

/// Tolerance used to decide whether a tabulated density integrates to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

/// Default number of grid points for tabulated densities.
pub const DEFAULT_GRID_POINTS: usize = 4001;

/// Default half-width of a Gaussian grid, in standard deviations.
pub const DEFAULT_GRID_SIGMAS: f64 = 6.0;

/// Minimum number of grid points accepted by [`GridDensity`].
pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian1D {
    mean: f64,
    variance: f64,
}

impl Gaussian1D {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(FusionError::InvalidParameter(format!(
                "gaussian mean must be finite, got {mean}"
            )));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(FusionError::InvalidParameter(format!(
                "gaussian variance must be positive, got {variance}"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        normal_pdf(x - self.mean, self.variance)
    }

    /// Mean squared error of this density as an estimator of `truth`.
    pub fn mse(&self, truth: TruthContext) -> f64 {
        let bias = self.mean - truth.theta();
        self.variance + bias * bias
    }
}

/// `N(x; 0, variance)`.
pub fn normal_pdf(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (2.0 * PI * variance).sqrt()
}

/// `ln N(x; 0, variance)`.
pub fn normal_ln_pdf(x: f64, variance: f64) -> f64 {
    -0.5 * x * x / variance - 0.5 * (2.0 * PI * variance).ln()
}

/// The true value of the estimated parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthContext {
    theta: f64,
}

impl TruthContext {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(FusionError::InvalidParameter(format!(
                "truth must be finite, got {theta}"
            )));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
}

/// An MSE split into a variance-like part and a squared-bias-like part.
///
/// `total` is always the sum of the two parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseBreakdown {
    pub total: f64,
    pub variance_part: f64,
    pub bias_sq_part: f64,
}

impl MseBreakdown {
    pub fn from_parts(variance_part: f64, bias_sq_part: f64) -> Self {
        Self {
            total: variance_part + bias_sq_part,
            variance_part,
            bias_sq_part,
        }
    }
}

/// A non-negative function tabulated on a uniform grid over `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    x_min: f64,
    x_max: f64,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(x_min: f64, x_max: f64, values: Vec<f64>) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(FusionError::InvalidParameter(format!(
                "grid range [{x_min}, {x_max}] is empty or not finite"
            )));
        }
        if values.len() < MIN_GRID_POINTS {
            return Err(FusionError::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(FusionError::InvalidParameter(format!(
                "density value {bad} is negative or not finite"
            )));
        }
        if values.iter().all(|v| *v == 0.0) {
            return Err(FusionError::Empty("density support"));
        }
        Ok(Self {
            x_min,
            x_max,
            values,
        })
    }

    /// Tabulates `f` at `n_points` equally spaced points, endpoints included.
    pub fn from_fn(x_min: f64, x_max: f64, n_points: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n_points < 2 {
            return Err(FusionError::InvalidParameter(format!(
                "grid needs at least {MIN_GRID_POINTS} points, got {n_points}"
            )));
        }
        let step = (x_max - x_min) / (n_points - 1) as f64;
        let values = (0..n_points).map(|i| f(x_min + step * i as f64)).collect();
        Self::new(x_min, x_max, values)
    }

    /// A Gaussian tabulated over `mean ± 6σ` with the default resolution.
    pub fn from_gaussian(g: &Gaussian1D) -> Result<Self> {
        let (lo, hi) = padded_range(std::slice::from_ref(g), DEFAULT_GRID_SIGMAS);
        Self::from_fn(lo, hi, DEFAULT_GRID_POINTS, |x| g.pdf(x))?.normalized()
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn step(&self) -> f64 {
        (self.x_max - self.x_min) / (self.values.len() - 1) as f64
    }

    pub fn x_at(&self, i: usize) -> f64 {
        self.x_min + self.step() * i as f64
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let step = self.step();
        (0..self.values.len()).map(move |i| self.x_min + step * i as f64)
    }

    /// Trapezoidal integral of the tabulated values.
    pub fn integral(&self) -> f64 {
        self.integrate(|_, v| v)
    }

    pub fn is_normalized(&self) -> bool {
        (self.integral() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// Rescales the values so the trapezoidal integral is one.
    pub fn normalized(mut self) -> Result<Self> {
        let mass = self.integral();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(FusionError::UnnormalizedDensity(mass));
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        Ok(self)
    }

    /// Indices of the grid points where the density is strictly positive.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0)
            .map(|(i, _)| i)
    }

    pub fn same_grid(&self, other: &GridDensity) -> bool {
        self.x_min == other.x_min && self.x_max == other.x_max && self.values.len() == other.values.len()
    }

    /// Trapezoidal integral of `g(x, f(x))`.
    pub(crate) fn integrate(&self, g: impl Fn(f64, f64) -> f64) -> f64 {
        let step = self.step();
        let last = self.values.len() - 1;
        let inner: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let term = g(self.x_min + step * i as f64, v);
                if i == 0 || i == last {
                    0.5 * term
                } else {
                    term
                }
            })
            .sum();
        inner * step
    }

    fn require_normalized(&self) -> Result<f64> {
        let mass = self.integral();
        if (mass - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(FusionError::UnnormalizedDensity(mass));
        }
        Ok(mass)
    }
}

/// `[min(mean - k·σ), max(mean + k·σ)]` over a set of Gaussians.
pub fn padded_range(gs: &[Gaussian1D], sigmas: f64) -> (f64, f64) {
    gs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
        let pad = sigmas * g.std_dev();
        (lo.min(g.mean - pad), hi.max(g.mean + pad))
    })
}

/// Mean and variance of a normalized tabulated density.
///
/// Moments are taken with respect to the grid's own trapezoidal mass, which
/// equals one within [`NORMALIZATION_TOLERANCE`].
pub fn moments_of_grid(d: &GridDensity) -> Result<MomentSummary> {
    let mass = d.require_normalized()?;
    let mean = d.integrate(|x, f| x * f) / mass;
    let variance = d.integrate(|x, f| (x - mean) * (x - mean) * f) / mass;
    Ok(MomentSummary { mean, variance })
}

/// MSE of a normalized tabulated density about `truth`, split as
/// variance + squared bias.
pub fn mse_of_grid(d: &GridDensity, truth: TruthContext) -> Result<MseBreakdown> {
    let mass = d.require_normalized()?;
    let theta = truth.theta();
    let total = d.integrate(|x, f| (theta - x) * (theta - x) * f) / mass;
    let m = moments_of_grid(d)?;
    let bias = m.mean - theta;
    Ok(MseBreakdown {
        total,
        variance_part: m.variance,
        bias_sq_part: bias * bias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform01() -> GridDensity {
        GridDensity::from_fn(0.0, 1.0, DEFAULT_GRID_POINTS, |_| 1.0).unwrap()
    }

    #[test]
    fn uniform_moments() {
        let m = moments_of_grid(&uniform01()).unwrap();
        assert!((m.mean - 0.5).abs() < 1e-12);
        assert!((m.variance - 1.0 / 12.0).abs() < 1e-7);
    }

    #[test]
    fn gaussian_moments_on_fixed_range() {
        let g = Gaussian1D::new(50.0, 100.0).unwrap();
        let d = GridDensity::from_fn(0.0, 100.0, 4001, |x| g.pdf(x)).unwrap().normalized().unwrap();
        let m = moments_of_grid(&d).unwrap();
        assert!((m.mean - 50.0).abs() < 0.01);
        assert!((m.variance - 100.0).abs() < 0.1);
    }

    #[test]
    fn triangular_density_mean() {
        let top = 2f64.sqrt();
        let d = GridDensity::from_fn(0.0, top, DEFAULT_GRID_POINTS, |x| x).unwrap();
        assert!(d.is_normalized());
        let m = moments_of_grid(&d).unwrap();
        assert!((m.mean - 2.0 * top / 3.0).abs() < 1e-6);
        assert!((m.mean - 0.94281).abs() < 1e-5);
    }

    #[test]
    fn mse_examples() {
        let g = Gaussian1D::new(50.0, 100.0).unwrap();
        let d = GridDensity::from_gaussian(&g).unwrap();
        let at50 = mse_of_grid(&d, TruthContext::new(50.0).unwrap()).unwrap();
        assert!((at50.total - 100.0).abs() < 0.1);
        assert!(at50.bias_sq_part < 1e-9);
        let at55 = mse_of_grid(&d, TruthContext::new(55.0).unwrap()).unwrap();
        assert!((at55.total - 125.0).abs() < 0.1);
        let u = mse_of_grid(&uniform01(), TruthContext::new(0.0).unwrap()).unwrap();
        assert!((u.total - 1.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let d = GridDensity::from_fn(0.0, 1.0, 64, |_| 2.0).unwrap();
        assert!(matches!(moments_of_grid(&d), Err(FusionError::UnnormalizedDensity(_))));
        let t = TruthContext::new(0.0).unwrap();
        assert!(matches!(mse_of_grid(&d, t), Err(FusionError::UnnormalizedDensity(_))));
        assert!(moments_of_grid(&d.normalized().unwrap()).is_ok());
    }

    #[test]
    fn construction_errors() {
        assert!(GridDensity::new(0.0, 1.0, vec![1.0; 8]).is_err());
        assert!(GridDensity::new(1.0, 0.0, vec![1.0; 32]).is_err());
        assert!(GridDensity::new(0.0, 1.0, vec![0.0; 32]).is_err());
        let mut v = vec![1.0; 32];
        v[3] = -1.0;
        assert!(GridDensity::new(0.0, 1.0, v).is_err());
        assert!(Gaussian1D::new(0.0, 0.0).is_err());
        assert!(TruthContext::new(f64::NAN).is_err());
    }

    #[test]
    fn support_is_strictly_positive_points() {
        let d = GridDensity::from_fn(0.0, 2.0, 21, |x| if x <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(d.support().count(), 11);
    }

    proptest! {
        #[test]
        fn mse_equals_variance_plus_bias(mu in -50.0f64..50.0, var in 0.5f64..400.0, theta in -100.0f64..100.0) {
            let g = Gaussian1D::new(mu, var).unwrap();
            let d = GridDensity::from_gaussian(&g).unwrap();
            let m = moments_of_grid(&d).unwrap();
            let mse = mse_of_grid(&d, TruthContext::new(theta).unwrap()).unwrap();
            let split = m.variance + (m.mean - theta).powi(2);
            prop_assert!((mse.total - split).abs() <= 1e-9 * mse.total.max(1e-300));
        }
    }
}
