//! Closed-form AA of two correlated estimators: optimal weights, the
//! variance floor, and when equal weights beat the better source.
//!
//! cargo run --example vfusion_bounds

use avgfusion::vfusion::{
    aa_variance_lower_bound, aa_variance_two, optimal_aa_weights, unweighted_aa_beats_best, unweighted_threshold,
    v_aa, v_ga, MseCorrelation, MseRatio, OptimalWeights, PairCorrelation, VarianceRatio,
};
use avgfusion::FusionWeights;

fn main() -> avgfusion::Result<()> {
    let w = FusionWeights::new(vec![0.3, 0.7])?;
    println!("AA of [4, 9] = {:.4}, GA = {:.4}", v_aa(&[4.0, 9.0], &w)?, v_ga(&[4.0, 9.0], &w)?);

    let (s1, s2) = (100.0, 200.0);
    let alpha = VarianceRatio::new(s2 / s1)?;
    println!("\nΣ₁ = {s1}, Σ₂ = {s2}; interior optimum needs ρ < {:.4}", 1.0 / alpha.value().sqrt());
    println!("{:>6} {:>10} {:>12} {:>12}", "rho", "omega1", "min var", "var at 1/2");
    for r in [-0.5, 0.0, 0.4, 0.7, 0.71, 0.9] {
        let rho = PairCorrelation::new(r)?;
        let omega1 = match optimal_aa_weights(alpha, rho) {
            OptimalWeights::Interior(w) => format!("{:.4}", w.get(0)),
            OptimalWeights::Boundary(end) => format!("{end:?}"),
        };
        let floor = aa_variance_lower_bound(s1, s2, rho)?;
        let equal = aa_variance_two(s1, s2, rho, &FusionWeights::uniform(2)?)?;
        println!("{r:>6} {omega1:>10} {floor:>12.3} {equal:>12.3}");
    }

    println!("\nequal weights beat the better source iff β < g(γ):");
    for gamma in [1.0, 2.0, 4.0, 9.0, 12.0] {
        let g = unweighted_threshold(gamma);
        let beats = unweighted_aa_beats_best(MseRatio::new(gamma)?, MseCorrelation::new(-0.5)?);
        println!("  γ = {gamma:>4}: g = {g:>7.4}, wins at β = -0.5: {beats}");
    }
    Ok(())
}
