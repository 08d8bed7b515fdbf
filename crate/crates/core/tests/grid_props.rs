use proptest::prelude::*;
use votewave::grid::{GridCdf, GridRecursion};
use votewave::increments::IncrementLaw;
use votewave::models::presets;

mod common;

/// A distribution function on `len` lattice points starting at `start`.
fn cdf_values(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, len).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

fn recursion(seed: u64) -> GridRecursion<f64> {
    let case = common::random_case(seed);
    GridRecursion::new(&case.model(), &case.increments()).unwrap()
}

fn shifted(f: &GridCdf<f64>, by: i64) -> GridCdf<f64> {
    GridCdf::new(f.start() + by, f.h(), f.values().to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn step_keeps_distribution_functions(seed in any::<u64>(), v in cdf_values(12), start in -6i64..6) {
        let rec = recursion(seed);
        let f = GridCdf::new(start, rec.h(), v).unwrap();
        let next = rec.step(&f);
        prop_assert!(next.is_nondecreasing(0.0));
        prop_assert!(next.values().iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn comparison_principle(seed in any::<u64>(), a in cdf_values(12), b in cdf_values(12), start in -6i64..6) {
        let rec = recursion(seed);
        let upper: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect();
        let lo = GridCdf::new(start, rec.h(), a).unwrap();
        let hi = GridCdf::new(start, rec.h(), upper).unwrap();
        let (lo, hi) = (rec.step(&lo), rec.step(&hi));
        for i in lo.start().min(hi.start())..=lo.end().max(hi.end()) {
            prop_assert!(lo.at(i) <= hi.at(i) + 1e-15);
        }
    }

    #[test]
    fn translation_commutes_with_step(seed in any::<u64>(), v in cdf_values(10), by in -5i64..5) {
        let rec = recursion(seed);
        let f = GridCdf::new(0, rec.h(), v).unwrap();
        let a = shifted(&rec.step(&f), by);
        let b = rec.step(&shifted(&f, by));
        for i in a.start().min(b.start())..=a.end().max(b.end()) {
            prop_assert_eq!(a.at(i), b.at(i));
        }
    }

    #[test]
    fn translates_sandwich_the_iterates(k in 1i64..6, n in 1usize..30) {
        // F_0 between two translates of itself stays between their iterates
        let q = IncrementLaw::lazy_symmetric();
        let rec = GridRecursion::<f64>::new(&presets::fig1b(), &q).unwrap();
        let f = rec.run(5);
        let (mut lo, mut mid, mut hi) = (shifted(&f, k), f.clone(), shifted(&f, -k));
        for _ in 0..n {
            lo = rec.advance(&lo);
            mid = rec.advance(&mid);
            hi = rec.advance(&hi);
        }
        for i in hi.start() - 2..=lo.end() + 2 {
            prop_assert!(lo.at(i) <= mid.at(i) + 1e-14 && mid.at(i) <= hi.at(i) + 1e-14);
        }
    }
}

#[test]
fn density_recursion_preserves_order() {
    let q = IncrementLaw::raised_cosine(1.0, 0.05).unwrap();
    let model = presets::binary_ternary(common::rat(1, 4));
    let rec = GridRecursion::<f64>::new(&model, &q).unwrap();
    let f = rec.run(10);
    let g = shifted(&f, -3);
    let (f2, g2) = (rec.advance(&f), rec.advance(&g));
    assert!(f2.is_nondecreasing(0.0));
    for i in f2.start() - 5..=g2.end() + 5 {
        assert!(f2.at(i) <= g2.at(i) + 1e-14);
    }
}
