//! Monte Carlo AA/GA mean and variance over the fusion weight for two
//! correlated truncated-Gaussian estimators.
//!
//! cargo run --release --example mc_sweep -- [rho] [n]

use avgfusion::montecarlo::{sweep_weights, CorrelatedPairSpec, PairFamily};
use avgfusion::{Gaussian1D, TruthContext};

fn main() -> avgfusion::Result<()> {
    let mut args = std::env::args().skip(1);
    let rho: f64 = args.next().map_or(0.0, |s| s.parse().expect("rho"));
    let n: usize = args.next().map_or(200_000, |s| s.parse().expect("n"));

    let spec = CorrelatedPairSpec {
        family: PairFamily::TruncatedGaussian {
            first: Gaussian1D::new(50.0, 100.0)?,
            second: Gaussian1D::new(60.0, 200.0)?,
        },
        target_rho: rho,
        n_samples: n,
        seed: 1,
    };
    let r = sweep_weights(&spec, TruthContext::new(55.0)?, 19)?;
    println!("achieved rho {:.4} over {n} pairs", r.achieved_rho);
    println!("{:>7} {:>9} {:>9} {:>9} {:>9}", "omega1", "aa_mean", "aa_var", "ga_mean", "ga_var");
    for i in 0..r.len() {
        println!(
            "{:>7.2} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            r.weights_grid[i], r.aa_mean[i], r.aa_var[i], r.ga_mean[i], r.ga_var[i]
        );
    }
    let k = r.argmin_aa_var();
    println!("smallest AA variance {:.3} at omega1 = {:.2}", r.aa_var[k], r.weights_grid[k]);
    Ok(())
}
