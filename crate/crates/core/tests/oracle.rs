mod common;

use common::{cdf_at_atoms, fig1a_case, random_case, rat};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use votewave::grid::GridRecursion;
use votewave::mc::{simulate_threshold, SimConfig};

#[test]
fn enumeration_reproduces_hand_computed_fig1a_step() {
    let law = fig1a_case().enumerate(1);
    let cdf = cdf_at_atoms(&law);
    let at_zero = cdf.iter().find(|(x, _)| *x == rat(0, 1)).unwrap();
    assert_eq!(at_zero.1, rat(27, 32));
    // by symmetry P[M_1 <= -1] = 1 - P[M_1 <= 0]
    assert_eq!(cdf[0].1, rat(5, 32));
}

#[test]
fn grid_matches_enumeration_exactly() {
    for seed in 0..60 {
        let case = random_case(seed);
        let exact = GridRecursion::<BigRational>::new(&case.model(), &case.increments()).unwrap();
        let float = GridRecursion::<f64>::new(&case.model(), &case.increments()).unwrap();
        let (mut fe, mut ff) = (exact.initial(), float.initial());
        for n in 1..=3 {
            fe = exact.advance(&fe);
            ff = float.advance(&ff);
            for (x, p) in cdf_at_atoms(&case.enumerate(n)) {
                let x = x.to_f64().unwrap();
                assert_eq!(fe.at_position(x), p, "seed {seed} n {n} x {x}");
                let diff = (ff.at_position(x) - p.to_f64().unwrap()).abs();
                assert!(diff < 1e-12, "seed {seed} n {n} x {x}: {diff}");
            }
        }
    }
}

#[test]
fn monte_carlo_matches_enumeration() {
    let replicas = 20_000;
    for seed in 0..12 {
        let case = random_case(seed);
        for n in 1..=3 {
            let config = SimConfig::new(case.model(), case.increments(), n, replicas, 1000 + seed);
            let ecdf = simulate_threshold(&config).unwrap();
            for (x, p) in cdf_at_atoms(&case.enumerate(n)) {
                let p = p.to_f64().unwrap();
                let se = (p * (1.0 - p) / replicas as f64).sqrt();
                let got = ecdf.eval(x.to_f64().unwrap());
                assert!((got - p).abs() <= 4.0 * se + 1e-12, "seed {seed} n {n}: {got} vs {p}");
            }
        }
    }
}
