//! Which polynomials are recursion polynomials of a voting model.
//!
//! cargo run --release --example representability

use votewave::bernstein::{BernsteinPoly, MonomialPoly};
use votewave::models::{outcome_representation, threshold_representation, DEFAULT_D_CAP};

fn show(name: &str, g: &BernsteinPoly<f64>) {
    println!("{name}");
    match threshold_representation(g, DEFAULT_D_CAP) {
        Ok(rep) => println!("  threshold model: {}", rep.to_json()),
        Err(d) => println!("  no threshold model: {d}"),
    }
    match outcome_representation(g, DEFAULT_D_CAP) {
        Ok(rep) => println!("  outcome model: {}", rep.to_json()),
        Err(d) => println!("  no outcome model: {d}"),
    }
}

fn main() -> votewave::Result<()> {
    show("median of three", &BernsteinPoly::new(vec![0.0, 0.0, 1.0, 1.0])?);
    // needs elevation before all coefficients are in [0,1]
    show("x + x(1-x)(1-2x)", &BernsteinPoly::from_monomial(&MonomialPoly::new(vec![0.0, 2.0, -3.0, 2.0]), 3)?);
    // stays in (0,1) but is not monotone
    show("x + 5/2 x(1-x)(1-2x)", &BernsteinPoly::from_monomial(&MonomialPoly::new(vec![0.0, 3.5, -7.5, 5.0]), 3)?);
    show("2x^2 - x", &BernsteinPoly::new(vec![0.0, -0.5, 1.0])?);
    Ok(())
}
