//! Correlated positive sample pairs and empirical AA/GA statistics over a
//! sweep of fusion weights.
//!
//! Randomness comes from ChaCha8 seeded with the pair seed. Samples are
//! produced in fixed-size chunks and chunk `k` draws from stream `k`, so the
//! output does not depend on how many threads run. The copula calibration
//! pilot for the Poisson family draws from stream `u64::MAX`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::density::{Gaussian1D, MomentSummary, TruthContext};
use crate::error::{FusionError, Result};

pub const MIN_SAMPLES: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_GRID_SIZE: usize = 99;

/// Accepted pairs per RNG stream.
pub const CHUNK_LEN: usize = 1 << 16;

const PILOT_STREAM: u64 = u64::MAX;
const PILOT_LEN: usize = 100_000;
const CALIBRATION_STEPS: usize = 48;
const MAX_COPULA_RHO: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PairFamily {
    /// Bivariate normal restricted to the positive quadrant.
    TruncatedGaussian { first: Gaussian1D, second: Gaussian1D },
    /// Poisson margins joined by a Gaussian copula; zeros are redrawn.
    Poisson { rate1: f64, rate2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedPairSpec {
    pub family: PairFamily,
    pub target_rho: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl CorrelatedPairSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_rho >= 0.0 && self.target_rho < 1.0) {
            return Err(FusionError::InvalidParameter(format!(
                "target correlation must lie in [0, 1), got {}",
                self.target_rho
            )));
        }
        if self.n_samples < MIN_SAMPLES {
            return Err(FusionError::InvalidParameter(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                self.n_samples
            )));
        }
        if let PairFamily::Poisson { rate1, rate2 } = self.family {
            for rate in [rate1, rate2] {
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(FusionError::InvalidParameter(format!(
                        "poisson rate must be positive, got {rate}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePairs {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    /// Empirical Pearson correlation of the returned pairs.
    pub achieved_rho: f64,
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pearson correlation of two equal-length samples.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    sxy / (sxx * syy).sqrt()
}

/// Maps a standard normal draw to a Poisson variate through the thresholds
/// `Φ⁻¹(F(k))`, so `X = min{k : z ≤ Φ⁻¹(F(k))}`.
#[derive(Debug, Clone)]
struct PoissonQuantile {
    z_thresholds: Vec<f64>,
}

impl PoissonQuantile {
    fn new(rate: f64) -> Self {
        let normal = Normal::standard();
        let mut pmf = (-rate).exp();
        let mut cdf = pmf;
        let mut z_thresholds = Vec::new();
        let mut k = 0u32;
        let cap = rate + 60.0 * rate.sqrt() + 60.0;
        while 1.0 - cdf > 1e-15 && (k as f64) < cap {
            z_thresholds.push(normal.inverse_cdf(cdf));
            k += 1;
            pmf *= rate / k as f64;
            cdf += pmf;
        }
        Self { z_thresholds }
    }

    fn sample(&self, z: f64) -> f64 {
        self.z_thresholds.partition_point(|t| *t < z) as f64
    }
}

fn correlated_normals(rng: &mut ChaCha8Rng, rho: f64) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let e: f64 = rng.sample(StandardNormal);
    (z1, rho * z1 + (1.0 - rho * rho).sqrt() * e)
}

/// Pearson correlation of the positive Poisson pairs produced by copula
/// correlation `r` on a fixed pilot sample.
fn pilot_correlation(pilot: &[(f64, f64)], q1: &PoissonQuantile, q2: &PoissonQuantile, r: f64) -> f64 {
    let c = (1.0 - r * r).sqrt();
    let (mut xs, mut ys) = (Vec::with_capacity(pilot.len()), Vec::with_capacity(pilot.len()));
    for &(z1, e) in pilot {
        let x = q1.sample(z1);
        let y = q2.sample(r * z1 + c * e);
        if x > 0.0 && y > 0.0 {
            xs.push(x);
            ys.push(y);
        }
    }
    pearson(&xs, &ys)
}

/// Copula correlation whose Poisson pairs reach `target` Pearson correlation.
fn calibrate_copula(spec: &CorrelatedPairSpec, q1: &PoissonQuantile, q2: &PoissonQuantile) -> Result<f64> {
    if spec.target_rho == 0.0 {
        return Ok(0.0);
    }
    let mut rng = chunk_rng(spec.seed, PILOT_STREAM);
    let pilot: Vec<(f64, f64)> = (0..PILOT_LEN)
        .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let high = pilot_correlation(&pilot, q1, q2, MAX_COPULA_RHO);
    if spec.target_rho > high {
        return Err(FusionError::InfeasibleCorrelation {
            target: spec.target_rho,
            low: 0.0,
            high,
        });
    }
    let (mut lo, mut hi) = (0.0, MAX_COPULA_RHO);
    for _ in 0..CALIBRATION_STEPS {
        let mid = 0.5 * (lo + hi);
        if pilot_correlation(&pilot, q1, q2, mid) < spec.target_rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

enum Sampler {
    Gaussian { first: Gaussian1D, second: Gaussian1D, rho: f64 },
    Poisson { q1: PoissonQuantile, q2: PoissonQuantile, rho: f64 },
}

impl Sampler {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<(f64, f64)> {
        match self {
            Sampler::Gaussian { first, second, rho } => {
                let (z1, z2) = correlated_normals(rng, *rho);
                let x = first.mean() + first.std_dev() * z1;
                let y = second.mean() + second.std_dev() * z2;
                (x > 0.0 && y > 0.0).then_some((x, y))
            }
            Sampler::Poisson { q1, q2, rho } => {
                let (z1, z2) = correlated_normals(rng, *rho);
                let (x, y) = (q1.sample(z1), q2.sample(z2));
                (x > 0.0 && y > 0.0).then_some((x, y))
            }
        }
    }

    fn chunk(&self, seed: u64, stream: u64, len: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = chunk_rng(seed, stream);
        let (mut xs, mut ys) = (Vec::with_capacity(len), Vec::with_capacity(len));
        while xs.len() < len {
            if let Some((x, y)) = self.draw(&mut rng) {
                xs.push(x);
                ys.push(y);
            }
        }
        (xs, ys)
    }
}

/// Draws `n_samples` positive, correlated pairs.
///
/// Gaussian pairs are mixed with the target correlation and any pair with a
/// non-positive coordinate is redrawn. Poisson pairs use a Gaussian copula
/// whose correlation is calibrated so the Pearson correlation of the output
/// is close to the target; zero draws are redrawn.
pub fn sample_pairs(spec: &CorrelatedPairSpec) -> Result<SamplePairs> {
    spec.validate()?;
    let sampler = match spec.family {
        PairFamily::TruncatedGaussian { first, second } => Sampler::Gaussian {
            first,
            second,
            rho: spec.target_rho,
        },
        PairFamily::Poisson { rate1, rate2 } => {
            let q1 = PoissonQuantile::new(rate1);
            let q2 = PoissonQuantile::new(rate2);
            let rho = calibrate_copula(spec, &q1, &q2)?;
            Sampler::Poisson { q1, q2, rho }
        }
    };
    let n_chunks = spec.n_samples.div_ceil(CHUNK_LEN);
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_LEN.min(spec.n_samples - k * CHUNK_LEN);
            sampler.chunk(spec.seed, k as u64, len)
        })
        .collect();
    let mut first = Vec::with_capacity(spec.n_samples);
    let mut second = Vec::with_capacity(spec.n_samples);
    for (xs, ys) in chunks {
        first.extend(xs);
        second.extend(ys);
    }
    let achieved_rho = pearson(&first, &second);
    Ok(SamplePairs {
        first,
        second,
        achieved_rho,
    })
}

/// Mean, variance, MSE about a truth, and standard errors of the latter two.
///
/// Variances use the `1/n` normalization, so `mse = var + (mean - θ)²`
/// holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub mean: f64,
    pub var: f64,
    pub var_se: f64,
    pub mse: f64,
    pub mse_se: f64,
}

impl SampleStats {
    pub fn of(xs: &[f64], theta: f64) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let (mut m2, mut m4, mut e2, mut e4) = (0.0, 0.0, 0.0, 0.0);
        for x in xs {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
            let e = x - theta;
            let sq = e * e;
            e2 += sq;
            e4 += sq * sq;
        }
        let (var, m4) = (m2 / n, m4 / n);
        let (mse, e4) = (e2 / n, e4 / n);
        Self {
            mean,
            var,
            var_se: ((m4 - var * var).max(0.0) / n).sqrt(),
            mse,
            mse_se: ((e4 - mse * mse).max(0.0) / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub theta: f64,
    pub achieved_rho: f64,
    pub first: MomentSummary,
    pub second: MomentSummary,
    pub weights_grid: Vec<f64>,
    pub aa_mean: Vec<f64>,
    pub aa_var: Vec<f64>,
    pub aa_var_se: Vec<f64>,
    pub aa_mse: Vec<f64>,
    pub aa_mse_se: Vec<f64>,
    pub ga_mean: Vec<f64>,
    pub ga_var: Vec<f64>,
    pub ga_var_se: Vec<f64>,
    pub ga_mse: Vec<f64>,
    pub ga_mse_se: Vec<f64>,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.weights_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights_grid.is_empty()
    }

    /// Grid index of the smallest AA variance.
    pub fn argmin_aa_var(&self) -> usize {
        argmin(&self.aa_var)
    }

    pub fn argmin_ga_var(&self) -> usize {
        argmin(&self.ga_var)
    }
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// `ω₁ ∈ {1/(g+1), …, g/(g+1)}`.
pub fn weight_grid(grid_size: usize) -> Vec<f64> {
    let denom = (grid_size + 1) as f64;
    (1..=grid_size).map(|i| i as f64 / denom).collect()
}

fn summary(xs: &[f64]) -> MomentSummary {
    let s = SampleStats::of(xs, 0.0);
    MomentSummary {
        mean: s.mean,
        variance: s.var,
    }
}

/// Empirical AA/GA statistics of existing sample pairs at every grid weight.
pub fn sweep_samples(pairs: &SamplePairs, truth: TruthContext, grid_size: usize) -> Result<SweepResult> {
    if grid_size < 3 {
        return Err(FusionError::InvalidParameter(format!(
            "weight grid needs at least 3 points, got {grid_size}"
        )));
    }
    if pairs.first.len() != pairs.second.len() || pairs.first.is_empty() {
        return Err(FusionError::LengthMismatch {
            expected: pairs.first.len(),
            got: pairs.second.len(),
        });
    }
    if let Some(bad) = pairs.first.iter().chain(&pairs.second).find(|x| !(**x > 0.0)) {
        return Err(FusionError::NonPositiveValue(*bad));
    }
    let theta = truth.theta();
    let log1: Vec<f64> = pairs.first.iter().map(|x| x.ln()).collect();
    let log2: Vec<f64> = pairs.second.iter().map(|x| x.ln()).collect();
    let grid = weight_grid(grid_size);
    let rows: Vec<(SampleStats, SampleStats)> = grid
        .par_iter()
        .map(|&w1| {
            let w2 = 1.0 - w1;
            let aa: Vec<f64> = pairs.first.iter().zip(&pairs.second).map(|(x, y)| w1 * x + w2 * y).collect();
            let ga: Vec<f64> = log1.iter().zip(&log2).map(|(a, b)| (w1 * a + w2 * b).exp()).collect();
            (SampleStats::of(&aa, theta), SampleStats::of(&ga, theta))
        })
        .collect();
    let pick = |f: fn(&(SampleStats, SampleStats)) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    Ok(SweepResult {
        theta,
        achieved_rho: pairs.achieved_rho,
        first: summary(&pairs.first),
        second: summary(&pairs.second),
        weights_grid: grid,
        aa_mean: pick(|r| r.0.mean),
        aa_var: pick(|r| r.0.var),
        aa_var_se: pick(|r| r.0.var_se),
        aa_mse: pick(|r| r.0.mse),
        aa_mse_se: pick(|r| r.0.mse_se),
        ga_mean: pick(|r| r.1.mean),
        ga_var: pick(|r| r.1.var),
        ga_var_se: pick(|r| r.1.var_se),
        ga_mse: pick(|r| r.1.mse),
        ga_mse_se: pick(|r| r.1.mse_se),
    })
}

/// Draws pairs for `spec` and sweeps the fusion weight.
pub fn sweep_weights(spec: &CorrelatedPairSpec, truth: TruthContext, grid_size: usize) -> Result<SweepResult> {
    let pairs = sample_pairs(spec)?;
    sweep_samples(&pairs, truth, grid_size)
}

/// Empirical source MSEs and the correlation of their errors about a truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMse {
    pub mse1: f64,
    pub mse2: f64,
    pub beta: f64,
}

pub fn empirical_mse(pairs: &SamplePairs, truth: TruthContext) -> EmpiricalMse {
    let theta = truth.theta();
    let n = pairs.first.len() as f64;
    let (mut m1, mut m2, mut cross) = (0.0, 0.0, 0.0);
    for (x, y) in pairs.first.iter().zip(&pairs.second) {
        let (e1, e2) = (theta - x, theta - y);
        m1 += e1 * e1;
        m2 += e2 * e2;
        cross += e1 * e2;
    }
    let (m1, m2) = (m1 / n, m2 / n);
    EmpiricalMse {
        mse1: m1,
        mse2: m2,
        beta: cross / n / (m1 * m2).sqrt(),
    }
}
