//! Multi-sensor detection scenario: each sensor reports a Gaussian mixture
//! with one component per detected target plus Poisson clutter. Reports are
//! fused with the mixture AA or GA and scored against the true positions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{FusionError, Result};
use crate::gmfusion::{
    extract_states, gm_aa, gm_ga_fold, reduce, ExtractionRule, GaussianComponent, GaussianMixture, ReductionParams,
};
use crate::weights::FusionWeights;

/// Merge threshold used for scenario mixtures.
///
/// Neighbouring default targets sit two detection standard deviations apart,
/// exactly on the generic threshold of 4, and would be merged into one peak.
pub const SCENARIO_MERGE_THRESHOLD: f64 = 1.0;

/// Reduction parameters for scenario fusion: generic pruning and cap with
/// [`SCENARIO_MERGE_THRESHOLD`].
pub fn scenario_reduction() -> ReductionParams {
    ReductionParams {
        merge_threshold: SCENARIO_MERGE_THRESHOLD,
        ..ReductionParams::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub target_positions: Vec<f64>,
    pub detection_prob: f64,
    /// Mean number of false alarms per sensor.
    pub clutter_rate: f64,
    pub clutter_range: (f64, f64),
    pub n_sensors: usize,
    pub detection_weight: f64,
    pub detection_variance: f64,
    pub clutter_weight: f64,
    pub clutter_variance: f64,
    pub measurement_noise_std: f64,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    /// Five targets, six sensors, detection probability 0.9 and on average
    /// one false alarm per sensor spread over `[0, 200]`.
    fn default() -> Self {
        Self {
            target_positions: vec![20.0, 40.0, 70.0, 110.0, 200.0],
            detection_prob: 0.9,
            clutter_rate: 1.0,
            clutter_range: (0.0, 200.0),
            n_sensors: 6,
            detection_weight: 0.8,
            detection_variance: 100.0,
            clutter_weight: 0.3,
            clutter_variance: 150.0,
            measurement_noise_std: 2.0,
            seed: 0,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FusionError::InvalidParameter(msg));
        if !(self.detection_prob > 0.0 && self.detection_prob <= 1.0) {
            return bad(format!("detection probability must lie in (0, 1], got {}", self.detection_prob));
        }
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return bad(format!("clutter rate must be non-negative, got {}", self.clutter_rate));
        }
        let (lo, hi) = self.clutter_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!("clutter range [{lo}, {hi}] is empty"));
        }
        if self.n_sensors == 0 {
            return bad("need at least one sensor".into());
        }
        for (name, v) in [
            ("detection_weight", self.detection_weight),
            ("detection_variance", self.detection_variance),
            ("clutter_weight", self.clutter_weight),
            ("clutter_variance", self.clutter_variance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.measurement_noise_std >= 0.0 && self.measurement_noise_std.is_finite()) {
            return bad(format!("measurement noise must be non-negative, got {}", self.measurement_noise_std));
        }
        if let Some(t) = self.target_positions.iter().find(|t| !t.is_finite()) {
            return bad(format!("target position {t} is not finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentOrigin {
    Detection { target_index: usize },
    Clutter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReport {
    pub sensor_id: usize,
    pub mixture: GaussianMixture,
    /// One entry per mixture component.
    pub origins: Vec<ComponentOrigin>,
}

fn sensor_report(spec: &ScenarioSpec, sensor_id: usize) -> Result<SensorReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(sensor_id as u64);
    let mut components = Vec::new();
    let mut origins = Vec::new();
    for (target_index, &t) in spec.target_positions.iter().enumerate() {
        let detected = rng.random::<f64>() < spec.detection_prob;
        let z: f64 = rng.sample(StandardNormal);
        if detected {
            let x = t + spec.measurement_noise_std * z;
            components.push(GaussianComponent::new(spec.detection_weight, x, spec.detection_variance)?);
            origins.push(ComponentOrigin::Detection { target_index });
        }
    }
    let n_clutter = if spec.clutter_rate > 0.0 {
        let poisson = Poisson::new(spec.clutter_rate)
            .map_err(|e| FusionError::InvalidParameter(format!("clutter rate: {e}")))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };
    let (lo, hi) = spec.clutter_range;
    for _ in 0..n_clutter {
        let x = rng.random_range(lo..hi);
        components.push(GaussianComponent::new(spec.clutter_weight, x, spec.clutter_variance)?);
        origins.push(ComponentOrigin::Clutter);
    }
    Ok(SensorReport {
        sensor_id,
        mixture: GaussianMixture::new(components),
        origins,
    })
}

/// One report per sensor. Sensor `k` draws from ChaCha stream `k` of the
/// scenario seed, so reports do not depend on generation order.
pub fn generate(spec: &ScenarioSpec) -> Result<Vec<SensorReport>> {
    spec.validate()?;
    (0..spec.n_sensors).into_par_iter().map(|id| sensor_report(spec, id)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionRule {
    Aa,
    Ga,
}

impl FusionRule {
    pub fn name(&self) -> &'static str {
        match self {
            FusionRule::Aa => "aa",
            FusionRule::Ga => "ga",
        }
    }
}

/// Fuses all reports and reduces the result.
///
/// `w = None` means equal weights. GA folds the reports in ascending
/// `sensor_id`, reducing after each step; if any report is empty the GA is
/// empty. A single report is only reduced.
pub fn fuse_scenario(
    reports: &[SensorReport],
    rule: FusionRule,
    w: Option<&FusionWeights>,
    reduction: &ReductionParams,
) -> Result<GaussianMixture> {
    if reports.is_empty() {
        return Err(FusionError::Empty("sensor reports"));
    }
    if reports.len() == 1 {
        return Ok(reduce(&reports[0].mixture, reduction));
    }
    let mut order: Vec<usize> = (0..reports.len()).collect();
    order.sort_by_key(|&i| reports[i].sensor_id);
    let uniform;
    let w = match w {
        Some(w) => {
            w.check_len(reports.len())?;
            w
        }
        None => {
            uniform = FusionWeights::uniform(reports.len())?;
            &uniform
        }
    };
    let gms: Vec<GaussianMixture> = order.iter().map(|&i| reports[i].mixture.clone()).collect();
    let ws = FusionWeights::new(order.iter().map(|&i| w.get(i)).collect())?;
    let fused = match rule {
        FusionRule::Aa => gm_aa(&gms, &ws)?,
        FusionRule::Ga => gm_ga_fold(&gms, &ws, Some(reduction))?,
    };
    Ok(reduce(&fused, reduction))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub n_found: usize,
    /// Extracted states not matched to any truth.
    pub n_false: usize,
    /// Absolute position error of every match, in matching order.
    pub position_errors: Vec<f64>,
}

/// Greedy one-to-one matching of extracted states to truths: the closest
/// remaining pair within `gate` is matched first. Not an optimal assignment.
pub fn score(fused: &GaussianMixture, rule: ExtractionRule, truth: &[f64], gate: f64) -> Result<Score> {
    if !(gate > 0.0) {
        return Err(FusionError::InvalidParameter(format!("gate must be positive, got {gate}")));
    }
    let states = extract_states(fused, rule);
    Ok(match_states(&states, truth, gate))
}

pub fn match_states(states: &[f64], truth: &[f64], gate: f64) -> Score {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, s) in states.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let d = (s - t).abs();
            if d <= gate {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_state = vec![false; states.len()];
    let mut used_truth = vec![false; truth.len()];
    let mut position_errors = Vec::new();
    for (d, i, j) in candidates {
        if !used_state[i] && !used_truth[j] {
            used_state[i] = true;
            used_truth[j] = true;
            position_errors.push(d);
        }
    }
    Score {
        n_found: position_errors.len(),
        n_false: states.len() - position_errors.len(),
        position_errors,
    }
}

/// Counts clutter points that lie beyond `gate` from every target, and how
/// many of them still have an extracted state within `gate`.
pub fn surviving_clutter(reports: &[SensorReport], states: &[f64], truth: &[f64], gate: f64) -> (usize, usize) {
    let near = |x: f64, ys: &[f64]| ys.iter().any(|y| (x - y).abs() <= gate);
    let clutter: Vec<f64> = reports
        .iter()
        .flat_map(|r| r.mixture.components().iter().zip(&r.origins))
        .filter(|(_, o)| **o == ComponentOrigin::Clutter)
        .map(|(c, _)| c.mean())
        .filter(|&x| !near(x, truth))
        .collect();
    let survived = clutter.iter().filter(|&&x| near(x, states)).count();
    (clutter.len(), survived)
}

/// Everything needed to run repeated seeded trials of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub spec: ScenarioSpec,
    pub n_trials: usize,
    pub extraction: ExtractionRule,
    pub gate: f64,
    pub reduction: ReductionParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub rule: FusionRule,
    pub n_targets: usize,
    pub n_found: usize,
    pub n_missed: usize,
    pub n_false: usize,
    pub n_components: usize,
    pub weight_sum: f64,
    pub mean_abs_error: f64,
    /// Clutter points farther than the gate from every target, over all sensors.
    pub n_clutter: usize,
    /// Those clutter points with an extracted state within the gate.
    pub n_clutter_survived: usize,
}

/// SplitMix64 finalizer; spreads consecutive trial indices over the seed space.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut z = base.wrapping_add((trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_trial(cfg: &TrialConfig, trial: usize, rules: &[FusionRule]) -> Result<Vec<TrialRow>> {
    let seed = trial_seed(cfg.spec.seed, trial);
    let spec = ScenarioSpec { seed, ..cfg.spec.clone() };
    let reports = generate(&spec)?;
    let truth = &spec.target_positions;
    rules
        .iter()
        .map(|&rule| {
            let fused = fuse_scenario(&reports, rule, None, &cfg.reduction)?;
            let states = extract_states(&fused, cfg.extraction);
            if !(cfg.gate > 0.0) {
                return Err(FusionError::InvalidParameter(format!("gate must be positive, got {}", cfg.gate)));
            }
            let s = match_states(&states, truth, cfg.gate);
            let (n_clutter, n_clutter_survived) = surviving_clutter(&reports, &states, truth, cfg.gate);
            let mean_abs_error = if s.n_found == 0 {
                f64::NAN
            } else {
                s.position_errors.iter().sum::<f64>() / s.n_found as f64
            };
            Ok(TrialRow {
                trial,
                seed,
                rule,
                n_targets: truth.len(),
                n_found: s.n_found,
                n_missed: truth.len() - s.n_found,
                n_false: s.n_false,
                n_components: fused.len(),
                weight_sum: fused.weight_sum(),
                mean_abs_error,
                n_clutter,
                n_clutter_survived,
            })
        })
        .collect()
}

/// Runs `n_trials` trials in parallel. Every rule sees the same sensor
/// reports within a trial. Rows come back sorted by trial, then rule.
pub fn run_trials(cfg: &TrialConfig, rules: &[FusionRule]) -> Result<Vec<TrialRow>> {
    cfg.spec.validate()?;
    let nested: Vec<Vec<TrialRow>> = (0..cfg.n_trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t, rules))
        .collect::<Result<_>>()?;
    let mut rows: Vec<TrialRow> = nested.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.trial, r.rule));
    Ok(rows)
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `wins + losses` fair coin flips. Ties should be dropped beforehand.
pub fn sign_test_p_value(wins: u64, losses: u64) -> f64 {
    let n = wins + losses;
    if n == 0 || wins == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    b.sf(wins - 1)
}
