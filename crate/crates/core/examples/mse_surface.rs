//! Closed-form variance and MSE of the AA and GA of two Gaussian densities
//! as the truth and the fusion weight move.
//!
//! cargo run --example mse_surface

use avgfusion::ffusion::{gaussian_aa_mse, gaussian_ga, gaussian_ga_mse, mse_surface};
use avgfusion::{FusionWeights, Gaussian1D, TruthContext};

fn main() -> avgfusion::Result<()> {
    let g1 = Gaussian1D::new(50.0, 100.0)?;
    let g2 = Gaussian1D::new(60.0, 200.0)?;
    let half = FusionWeights::uniform(2)?;

    let ga = gaussian_ga(&g1, &g2, &half)?;
    println!("GA of N(50, 100) and N(60, 200): N({:.4}, {:.4})", ga.mean(), ga.variance());

    let truth = TruthContext::new(55.0)?;
    let aa = gaussian_aa_mse(&g1, &g2, &half, truth)?;
    let gm = gaussian_ga_mse(&g1, &g2, &half, truth)?;
    println!("at θ = 55: AA mse {:.3} ({:.3} + {:.3}), GA mse {:.3} ({:.3} + {:.3})",
        aa.total, aa.variance_part, aa.bias_sq_part, gm.total, gm.variance_part, gm.bias_sq_part);

    let thetas = [40.0, 50.0, 55.0, 60.0, 70.0, 80.0];
    let omegas = [0.0, 0.25, 0.5, 0.75, 1.0];
    println!("\n{:>5} {:>6} {:>9} {:>9} {:>9} {:>9}", "theta", "w1", "aa_var", "ga_var", "aa_mse", "ga_mse");
    for p in mse_surface(&g1, &g2, &thetas, &omegas)? {
        println!(
            "{:>5} {:>6} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            p.theta, p.omega1, p.aa_var, p.ga_var, p.aa_mse, p.ga_mse
        );
    }
    Ok(())
}
