//! The grid recursion with exact rationals and with floats.
//!
//! cargo run --release --example iterate

use num_rational::BigRational;
use votewave::grid::GridRecursion;
use votewave::increments::IncrementLaw;
use votewave::models::presets;

fn main() -> votewave::Result<()> {
    let q = IncrementLaw::lazy_symmetric();
    let model = presets::fig1a();
    let exact = GridRecursion::<BigRational>::new(&model, &q)?;
    for (n, f) in exact.iter().enumerate().take(3) {
        let row: Vec<String> = f.values().iter().map(ToString::to_string).collect();
        println!("F_{n} from x = {}: {}", f.x(f.start()), row.join(", "));
    }

    let rec = GridRecursion::<f64>::new(&presets::fig1c(), &q)?;
    for (n, f) in rec.iter().enumerate().take(401).filter(|(n, _)| n % 100 == 0) {
        println!(
            "fig1c n={n:3}: q_0.05 {:+7.1}, median {:+7.1}, q_0.95 {:+7.1}, {} grid points",
            f.quantile(0.05)?,
            f.quantile(0.5)?,
            f.quantile(0.95)?,
            f.len()
        );
    }
    Ok(())
}
