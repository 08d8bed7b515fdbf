//! Iterates the three fig1 archetype models to n = 1000 and prints the cluster report.
//!
//! cargo run --release --example figure1

use votewave::grid::{cluster_report, GridCdf, GridRecursion};
use votewave::increments::IncrementLaw;
use votewave::models::{analyze_exact, presets};

fn main() -> votewave::Result<()> {
    let q = IncrementLaw::lazy_symmetric();
    for (name, model) in [("a", presets::fig1a()), ("b", presets::fig1b()), ("c", presets::fig1c())] {
        let nl = analyze_exact(&model.recursion_polynomial()?)?;
        let rec = GridRecursion::<f64>::new(&model, &q)?;
        let series: Vec<(usize, GridCdf)> = rec
            .iter()
            .enumerate()
            .filter(|(n, _)| *n > 0 && n % 50 == 0)
            .take_while(|(n, _)| *n <= 1000)
            .collect();
        let report = cluster_report(&series, &nl, 0.05)?;
        println!("fig1{name}: zeros {:?}, multiplicities {:?}", nl.zeros, nl.multiplicities);
        for n in [250, 500, 1000] {
            let offsets: Vec<String> = (1..nl.zeros.len())
                .map(|s| format!("{:+.3}", report.offset(s, n).unwrap()))
                .collect();
            println!("  n={n:4}: median - q_n per cluster = [{}]", offsets.join(", "));
        }
        for c in &report.clusters {
            println!(
                "  cluster {}: slope {:+.4}/step, bounded {}, tight {}",
                c.s, c.drift_slope, c.bounded, c.tight
            );
        }
    }
    Ok(())
}
