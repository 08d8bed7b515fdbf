//! Bernstein basics: the recursion polynomial of a model, elevation,
//! derivatives and the rescaled nonlinearity.
//!
//! cargo run --release --example bernstein

use votewave::bernstein::{rescale_nonlinearity, verify_rescale_identity, BernsteinPoly};
use votewave::models::{analyze_exact, presets};

fn main() -> votewave::Result<()> {
    let model = presets::fig1b();
    let g = model.recursion_polynomial::<f64>()?;
    println!("fig1b g in the Bernstein basis of degree {}: {:?}", g.degree(), g.coeffs());
    println!("monomial form: {:?}", g.to_monomial().coeffs());

    let up = g.elevate_to(8)?;
    println!("elevated to degree 8: {:?}", up.coeffs());
    for x in [0.1, 0.5, 0.9] {
        println!("  g({x}) = {:.12}, elevated {:.12}, g' = {:.6}", g.eval(&x), up.eval(&x), g.derivative().eval(&x));
    }

    let exact = model.recursion_polynomial()?;
    let nl = analyze_exact(&exact)?;
    println!("zeros of f = g - x: {:?} with multiplicities {:?}", nl.zeros, nl.multiplicities);

    let f = g.sub(&BernsteinPoly::identity(g.degree()));
    let (a1, a2) = (nl.zeros[1], nl.zeros[2]);
    let rescaled = rescale_nonlinearity(&f, &a1, &a2)?;
    println!("f on [{a1:.4}, {a2:.4}] rescaled to [0,1]: {:?}", rescaled.coeffs());
    let xs: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
    println!("expansion residual: {:.2e}", verify_rescale_identity(&model, a1, a2, &xs)?);
    Ok(())
}
