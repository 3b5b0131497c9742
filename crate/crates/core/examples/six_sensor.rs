//! Six sensors, five targets, Poisson clutter: how often AA and GA lose a
//! target or keep a false alarm.
//!
//! cargo run --release --example six_sensor -- [trials]

use avgfusion::gmfusion::ExtractionRule;
use avgfusion::scenario::{
    fuse_scenario, generate, run_trials, scenario_reduction, sign_test_p_value, FusionRule, ScenarioSpec, TrialConfig,
};

fn main() -> avgfusion::Result<()> {
    let trials: usize = std::env::args().nth(1).map_or(200, |s| s.parse().expect("trials"));
    let spec = ScenarioSpec::default();

    let reports = generate(&spec)?;
    for r in &reports {
        let means: Vec<String> = r.mixture.components().iter().map(|c| format!("{:.1}", c.mean())).collect();
        println!("sensor {}: {}", r.sensor_id, means.join(" "));
    }
    for rule in [FusionRule::Aa, FusionRule::Ga] {
        let fused = fuse_scenario(&reports, rule, None, &scenario_reduction())?;
        let peaks: Vec<String> = fused
            .components()
            .iter()
            .filter(|c| c.weight() > 0.05)
            .map(|c| format!("{:.1}@{:.2}", c.mean(), c.weight()))
            .collect();
        println!("{:>2} peaks above 0.05: {}", rule.name(), peaks.join(" "));
    }

    let cfg = TrialConfig {
        spec,
        n_trials: trials,
        extraction: ExtractionRule::Rank(usize::MAX),
        gate: 10.0,
        reduction: scenario_reduction(),
    };
    let rows = run_trials(&cfg, &[FusionRule::Aa, FusionRule::Ga])?;
    let (mut missed, mut clutter, mut worse, mut better) = ([0; 2], [0; 2], 0, 0);
    for pair in rows.chunks(2) {
        for (k, row) in pair.iter().enumerate() {
            missed[k] += row.n_missed;
            clutter[k] += row.n_clutter_survived;
        }
        match pair[1].n_missed.cmp(&pair[0].n_missed) {
            std::cmp::Ordering::Greater => worse += 1,
            std::cmp::Ordering::Less => better += 1,
            std::cmp::Ordering::Equal => {}
        }
    }
    let per = |x: usize| x as f64 / trials as f64;
    println!("\n{trials} trials, gate 10");
    println!("  missed targets per trial:   AA {:.3}  GA {:.3}", per(missed[0]), per(missed[1]));
    println!("  surviving clutter per trial: AA {:.3}  GA {:.3}", per(clutter[0]), per(clutter[1]));
    println!("  GA misses more in {worse} trials, fewer in {better} (sign test p = {:.2e})", sign_test_p_value(worse, better));
    Ok(())
}
