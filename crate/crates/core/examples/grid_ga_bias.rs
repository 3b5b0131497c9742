//! Pointwise AA and GA of two tabulated densities. A uniform density and a
//! ramp that share the mean √2·(2/3) fuse to an unbiased AA but a biased GA.
//!
//! cargo run --example grid_ga_bias

use avgfusion::density::DEFAULT_GRID_POINTS;
use avgfusion::ffusion::{grid_aa, grid_ga};
use avgfusion::{moments_of_grid, FusionWeights, GridDensity};

fn main() -> avgfusion::Result<()> {
    let top = 2f64.sqrt();
    let end = 4.0 * top / 3.0;
    let uniform = GridDensity::from_fn(0.0, end, DEFAULT_GRID_POINTS, |x| if x > 0.0 { 1.0 } else { 0.0 })?.normalized()?;
    let ramp = GridDensity::from_fn(0.0, end, DEFAULT_GRID_POINTS, |x| if x <= top * (1.0 + 1e-12) { x } else { 0.0 })?
        .normalized()?;
    let pair = [uniform, ramp];
    for (name, d) in [("uniform", &pair[0]), ("ramp", &pair[1])] {
        let m = moments_of_grid(d)?;
        println!("{name:>8}: mean {:.6} variance {:.6}", m.mean, m.variance);
    }
    let half = FusionWeights::uniform(2)?;
    let aa = moments_of_grid(&grid_aa(&pair, &half)?)?;
    let ga = moments_of_grid(&grid_ga(&pair, &half)?)?;
    println!("      AA: mean {:.6} (2√2/3 = {:.6})", aa.mean, 2.0 * top / 3.0);
    println!("      GA: mean {:.6} (3√2/5 = {:.6})", ga.mean, 3.0 * top / 5.0);
    Ok(())
}
