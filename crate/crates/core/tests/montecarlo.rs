use avgfusion::montecarlo::{sample_pairs, sweep_samples, CorrelatedPairSpec, PairFamily, SampleStats, SweepResult};
use avgfusion::{Gaussian1D, TruthContext};

fn gaussian(rho: f64) -> CorrelatedPairSpec {
    CorrelatedPairSpec {
        family: PairFamily::TruncatedGaussian {
            first: Gaussian1D::new(50.0, 100.0).unwrap(),
            second: Gaussian1D::new(60.0, 200.0).unwrap(),
        },
        target_rho: rho,
        n_samples: 1_000_000,
        seed: 17,
    }
}

fn poisson(rho: f64) -> CorrelatedPairSpec {
    CorrelatedPairSpec {
        family: PairFamily::Poisson { rate1: 12.0, rate2: 10.0 },
        target_rho: rho,
        n_samples: 1_000_000,
        seed: 17,
    }
}

fn sweep(spec: &CorrelatedPairSpec, theta: f64) -> SweepResult {
    let pairs = sample_pairs(spec).unwrap();
    sweep_samples(&pairs, TruthContext::new(theta).unwrap(), 99).unwrap()
}

#[test]
fn gaussian_pairs_match_margins() {
    let s = sample_pairs(&gaussian(0.0)).unwrap();
    let (a, b) = (SampleStats::of(&s.first, 0.0), SampleStats::of(&s.second, 0.0));
    assert!((a.mean - 50.0).abs() < 0.1, "{}", a.mean);
    assert!((b.mean - 60.0).abs() < 0.15, "{}", b.mean);
    assert!(s.achieved_rho.abs() < 0.005, "{}", s.achieved_rho);
    assert!(s.first.iter().chain(&s.second).all(|x| *x > 0.0));
}

#[test]
fn poisson_pairs_match_margins() {
    let s = sample_pairs(&poisson(0.0)).unwrap();
    let (a, b) = (SampleStats::of(&s.first, 0.0), SampleStats::of(&s.second, 0.0));
    assert!((a.mean - 12.0).abs() < 0.05 && (b.mean - 10.0).abs() < 0.05);
    assert!((a.var - 12.0).abs() < 0.2 && (b.var - 10.0).abs() < 0.2);
}

#[test]
fn poisson_correlation_is_calibrated() {
    for target in [0.3, 0.7] {
        let s = sample_pairs(&CorrelatedPairSpec { n_samples: 200_000, ..poisson(target) }).unwrap();
        assert!((s.achieved_rho - target).abs() < 0.01, "target {target} achieved {}", s.achieved_rho);
    }
}

#[test]
fn sweep_properties() {
    for spec in [gaussian(0.0), gaussian(0.4), gaussian(0.71), poisson(0.0), poisson(0.5)] {
        let r = sweep(&spec, 55.0);
        assert!(r.ga_mean.iter().zip(&r.aa_mean).all(|(g, a)| g <= a));
        // the AA - GA variance gap changes sign somewhere on the grid
        let signs: Vec<bool> = r.aa_var.iter().zip(&r.ga_var).map(|(a, g)| a > g).collect();
        assert!(signs.windows(2).any(|p| p[0] != p[1]), "{:?}", spec.family);
        let (ka, kg) = (r.argmin_aa_var(), r.argmin_ga_var());
        assert!(r.aa_var[ka] <= r.ga_var[kg] + 3.0 * r.ga_var_se[kg], "{:?} rho {}", spec.family, spec.target_rho);
        let km = r.aa_mse.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(r.aa_mse[km] >= r.aa_var[km] - 3.0 * r.aa_var_se[km]);
        // extreme grid points approach the single sources
        assert!((r.aa_var[0] - r.second.variance).abs() < 0.03 * r.second.variance);
        assert!((r.aa_var[98] - r.first.variance).abs() < 0.03 * r.first.variance);
    }
}

#[test]
fn interior_dip_only_below_threshold() {
    let low = sweep(&gaussian(0.0), 55.0);
    let k = low.argmin_aa_var();
    assert!((low.weights_grid[k] - 2.0 / 3.0).abs() < 0.05);
    assert!((low.aa_var[k] - 200.0 / 3.0).abs() < 1.5);
    let high = sweep(&gaussian(0.71), 55.0);
    let k = high.argmin_aa_var();
    assert!(high.aa_var[k] >= 100.0 - 3.0 * high.aa_var_se[k]);
}

#[test]
fn mse_matches_variance_when_truth_is_the_common_mean() {
    let spec = CorrelatedPairSpec {
        family: PairFamily::TruncatedGaussian {
            first: Gaussian1D::new(50.0, 100.0).unwrap(),
            second: Gaussian1D::new(50.0, 200.0).unwrap(),
        },
        ..gaussian(0.0)
    };
    let r = sweep(&spec, 50.0);
    for i in 0..r.len() {
        assert!((r.aa_mse[i] - r.aa_var[i]).abs() < 3.0 * r.aa_var_se[i]);
    }
}
