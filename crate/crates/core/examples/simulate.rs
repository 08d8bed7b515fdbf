//! Monte Carlo samples of the root value against the exact grid law.
//!
//! cargo run --release --example simulate

use votewave::grid::GridRecursion;
use votewave::increments::IncrementLaw;
use votewave::mc::{dkw_bound, minmax_binary, simulate_threshold, SimConfig};
use votewave::models::presets;

fn main() -> votewave::Result<()> {
    let q = IncrementLaw::lazy_symmetric();
    let model = presets::fig1b();
    for depth in [1, 3, 6] {
        let config = SimConfig::new(model.clone(), q.clone(), depth, 20_000, 1);
        let ecdf = simulate_threshold(&config)?;
        let f = GridRecursion::<f64>::new(&model, &q)?.run(depth);
        println!(
            "depth {depth}: median {:+}, mean {:+.4}, KS to grid {:.4} (DKW 99.9% radius {:.4})",
            ecdf.median(),
            ecdf.mean(),
            f.kolmogorov_distance(&ecdf),
            dkw_bound(ecdf.len(), 1e-3)
        );
    }

    let config = SimConfig::new(presets::ternary_median(), q, 8, 2_000, 2);
    let rows = minmax_binary(&config)?;
    let equal = rows.iter().filter(|[m, lo, hi]| m == lo && m == hi).count();
    println!("ternary median: M = min-max = max-min on {equal}/{} trees", rows.len());
    Ok(())
}
