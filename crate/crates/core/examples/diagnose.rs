//! Tightness diagnostics for a run configuration, as the `diagnose`
//! subcommand prints them.
//!
//! cargo run --release --example diagnose [config.json]

use votewave::cli::diagnose;
use votewave::config::RunConfig;

fn main() -> votewave::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/bistable_density.json").into());
    let cfg = RunConfig::load(path.as_ref())?;
    let report = diagnose(&cfg, &[200, 300, 400])?;
    println!("{}", serde_json::to_string_pretty(&report["gap_05_95"])?);
    println!("{}", serde_json::to_string_pretty(&report["clusters"]["summary"])?);
    println!("max med|M_n| = {}", report["median_abs"]["max"]);
    Ok(())
}
