//! AA and approximate GA of two Gaussian-mixture intensities, followed by
//! reduction and state extraction.
//!
//! cargo run --example mixture_fusion

use avgfusion::gmfusion::{
    extract_states, gm_aa, gm_ga_approx, isolated_peak_pair, reduce, ExtractionRule, GaussianMixture, ReductionParams,
};
use avgfusion::FusionWeights;

fn show(name: &str, gm: &GaussianMixture) {
    println!("{name} ({} components, weight sum {:.4})", gm.len(), gm.weight_sum());
    for c in gm.components() {
        println!("  w {:.4}  m {:>7.3}  P {:>7.2}", c.weight(), c.mean(), c.variance());
    }
}

fn main() -> avgfusion::Result<()> {
    let (gm1, gm2) = isolated_peak_pair();
    let w = FusionWeights::uniform(2)?;
    let aa = gm_aa(&[gm1.clone(), gm2.clone()], &w)?;
    let ga = gm_ga_approx(&[gm1, gm2], &w)?;
    show("AA", &aa);
    show("GA", &ga);

    let params = ReductionParams::default();
    for (name, gm) in [("AA", &aa), ("GA", &ga)] {
        let reduced = reduce(gm, &params);
        let n = reduced.weight_sum().round() as usize;
        let states = extract_states(&reduced, ExtractionRule::rank(n));
        println!("{name} reduced to {} components, rank-{n} states {states:.2?}", reduced.len());
    }

    println!("\nfused intensity on a coarse grid:");
    for x in (0..=10).map(|k| k as f64 * 12.0) {
        println!("  x {x:>5.1}  AA {:.5}  GA {:.5}", aa.density(x), ga.density(x));
    }
    Ok(())
}
