//! Solves the bistable traveling wave for the binary-ternary model with
//! raised-cosine increments, then checks it against the grid recursion and
//! the super/sub-solution sandwich.
//!
//! cargo run --release --example wave

use std::time::Instant;

use num_rational::BigRational;
use votewave::increments::IncrementLaw;
use votewave::models::{analyze, presets};
use votewave::scalar::Scalar;
use votewave::wave::{
    check_speed_bound, convergence_study, search_supersolution, solve_wave, trapping_check, WaveOptions,
};

fn main() -> votewave::Result<()> {
    let q = IncrementLaw::raised_cosine_default(1.0);
    let model = presets::binary_ternary(BigRational::from_ratio(1, 4));
    let nl = analyze(&model.recursion_polynomial()?)?;
    println!("theta = {:.12}, f'(0) = {}, f'(1) = {}", nl.theta().unwrap(), nl.df0(), nl.df1());

    let clock = Instant::now();
    let wave = solve_wave(&nl, &q, &WaveOptions::default())?;
    println!(
        "speed {:.10}, residual {:.2e}, {} iterations, {:.1}s, inside support: {}",
        wave.speed,
        wave.residual,
        wave.iterations,
        clock.elapsed().as_secs_f64(),
        check_speed_bound(&wave, &q)
    );
    for h in [0.02, 0.01, 0.0025] {
        let refined = solve_wave(&nl, &IncrementLaw::raised_cosine(1.0, h)?, &WaveOptions::default())?;
        println!("  h = {h}: speed {:.10} (change {:.1e})", refined.speed, (refined.speed - wave.speed).abs());
    }
    let (left, right) = wave.tail_widths(1e-6);
    println!("tail widths at 1e-6: left {left:.3}, right {right:.3}");

    let clock = Instant::now();
    let study = convergence_study(&nl, &q, &wave, 400)?;
    let rows = &study.rows;
    let drift = (rows[400].median - rows[200].median) / 200.0;
    let worst = (200..=400)
        .map(|n| (rows[n].median - rows[n - 1].median - wave.speed).abs())
        .fold(0.0, f64::max);
    println!(
        "median drift {drift:.10} (solver {:.10}), worst step deviation {worst:.2e}, x0 {:.6}, {:.1}s",
        wave.speed,
        study.x0,
        clock.elapsed().as_secs_f64()
    );
    println!("sup distance: n=100 {:.3e}, n=400 {:.3e}", rows[100].sup_dist, rows[400].sup_dist);

    let clock = Instant::now();
    let found = search_supersolution(&wave, &nl, &q, 50, 1.0)?;
    println!(
        "sandwich params {:?}: super defect {:.3e}, sub defect {:.3e}, {:.1}s",
        found.params,
        found.super_defect,
        found.sub_defect,
        clock.elapsed().as_secs_f64()
    );
    let clock = Instant::now();
    let runs = trapping_check(&wave, &found.params, &nl, &q, 100, 20, 5)?;
    let trapped = runs.iter().filter(|r| r.trapped(1e-8)).count();
    println!("trapped {trapped}/20 over 100 steps, {:.1}s", clock.elapsed().as_secs_f64());
    Ok(())
}
