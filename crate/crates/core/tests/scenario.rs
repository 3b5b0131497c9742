use avgfusion::gmfusion::{ExtractionRule, GaussianMixture};
use avgfusion::scenario::{
    fuse_scenario, generate, run_trials, scenario_reduction, score, ComponentOrigin, FusionRule, ScenarioSpec,
    TrialConfig,
};

fn weight_near(gm: &GaussianMixture, x: f64, radius: f64) -> f64 {
    gm.components().iter().filter(|c| (c.mean() - x).abs() <= radius).map(|c| c.weight()).sum()
}

/// Fused weight within `radius` of every target missed by at least one
/// sensor, as (AA, GA) pairs, over `seeds`.
fn missed_target_weights(seeds: std::ops::Range<u64>, radius: f64) -> Vec<(f64, f64)> {
    let p = scenario_reduction();
    let mut out = Vec::new();
    for seed in seeds {
        let spec = ScenarioSpec { seed, ..Default::default() };
        let reports = generate(&spec).unwrap();
        let aa = fuse_scenario(&reports, FusionRule::Aa, None, &p).unwrap();
        let ga = fuse_scenario(&reports, FusionRule::Ga, None, &p).unwrap();
        for (i, &t) in spec.target_positions.iter().enumerate() {
            let origin = ComponentOrigin::Detection { target_index: i };
            if reports.iter().any(|r| !r.origins.contains(&origin)) {
                out.push((weight_near(&aa, t, radius), weight_near(&ga, t, radius)));
            }
        }
    }
    out
}

#[test]
fn mean_component_count_per_sensor() {
    let n_seeds = 10_000;
    let mut total = 0usize;
    for seed in 0..n_seeds {
        let spec = ScenarioSpec { seed, ..Default::default() };
        total += generate(&spec).unwrap().iter().map(|r| r.mixture.len()).sum::<usize>();
    }
    let mean = total as f64 / (n_seeds as f64 * 6.0);
    assert!((mean - 5.5).abs() < 0.05, "{mean}");
}

#[test]
fn aa_keeps_every_detected_target() {
    let p = scenario_reduction();
    for seed in 0..200 {
        let spec = ScenarioSpec { seed, ..Default::default() };
        let reports = generate(&spec).unwrap();
        let aa = fuse_scenario(&reports, FusionRule::Aa, None, &p).unwrap();
        let gate = 3.0 * spec.measurement_noise_std;
        for (i, &t) in spec.target_positions.iter().enumerate() {
            let origin = ComponentOrigin::Detection { target_index: i };
            if reports.iter().any(|r| r.origins.contains(&origin)) {
                let s = score(&aa, ExtractionRule::Rank(usize::MAX), &[t], gate).unwrap();
                assert_eq!(s.n_found, 1, "seed {seed} target {t}");
            }
        }
    }
}

#[test]
fn ga_discounts_missed_targets_on_average() {
    let w = missed_target_weights(0..500, 10.0);
    assert!(w.len() > 1000);
    let n = w.len() as f64;
    let (aa, ga) = w.iter().fold((0.0, 0.0), |s, p| (s.0 + p.0, s.1 + p.1));
    assert!(ga / n < aa / n, "GA {} AA {}", ga / n, aa / n);
}

// Consensus rescales the GA to the average input mass, which then sits on
// few broad components; one of them can cover a missed target. Over seeds
// 0..500 this happens for 289 of 1162 missed targets within radius 10.
#[test]
#[ignore = "GA weight near a missed target exceeds AA in about a quarter of cases"]
fn ga_discounts_every_missed_target() {
    for (aa, ga) in missed_target_weights(0..500, 10.0) {
        assert!(ga < aa, "GA {ga} AA {aa}");
    }
}

#[test]
fn single_trial_rows_are_deterministic() {
    let cfg = TrialConfig {
        spec: ScenarioSpec { seed: 42, ..Default::default() },
        n_trials: 1,
        extraction: ExtractionRule::Rank(5),
        gate: 10.0,
        reduction: scenario_reduction(),
    };
    let rules = [FusionRule::Aa, FusionRule::Ga];
    assert_eq!(run_trials(&cfg, &rules).unwrap(), run_trials(&cfg, &rules).unwrap());
}
