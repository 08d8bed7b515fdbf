use std::collections::BTreeMap;

use num_rational::BigRational;
use proptest::prelude::*;
use votewave::bernstein::{BernsteinPoly, MonomialPoly};
use votewave::models::{
    outcome_representation, threshold_representation, Diagnosis, OffspringLaw, OutcomeRule, Rule, VotingModel,
    DEFAULT_D_CAP,
};

mod common;

fn max_gap(a: &BernsteinPoly<f64>, b: &BernsteinPoly<f64>) -> f64 {
    (0..=200).map(|i| i as f64 / 200.0).map(|x| (a.eval(&x) - b.eval(&x)).abs()).fold(0.0, f64::max)
}

fn outcome_model(d: usize, interior: &[u8]) -> VotingModel {
    let mut alpha = BTreeMap::new();
    alpha.insert((d, d), BigRational::from_integer(1.into()));
    for (k, a) in interior.iter().enumerate() {
        alpha.insert((k + 1, d), common::rat(i64::from(*a), 255));
    }
    VotingModel::new(OffspringLaw::fixed(d), Rule::Outcome(OutcomeRule::new(alpha))).unwrap()
}

fn from_monomial(c: &[f64]) -> BernsteinPoly<f64> {
    BernsteinPoly::from_monomial(&MonomialPoly::new(c.to_vec()), c.len() - 1).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn threshold_models_round_trip(seed in any::<u64>()) {
        let model = common::random_case(seed).model();
        let g = model.recursion_polynomial::<f64>().unwrap();
        let rep = threshold_representation(&g, DEFAULT_D_CAP).unwrap();
        let back = rep.to_model().unwrap().recursion_polynomial::<f64>().unwrap();
        prop_assert!(max_gap(&g, &back) < 1e-10);
    }

    #[test]
    fn outcome_models_round_trip((d, interior) in (1usize..=8).prop_flat_map(|d| (Just(d), prop::collection::vec(any::<u8>(), d - 1)))) {
        let model = outcome_model(d, &interior);
        let g = model.recursion_polynomial::<f64>().unwrap();
        let rep = outcome_representation(&g, DEFAULT_D_CAP).unwrap();
        let back = rep.to_model().unwrap().recursion_polynomial::<f64>().unwrap();
        prop_assert!(max_gap(&g, &back) < 1e-10);
    }
}

#[test]
fn outcome_only_witness() {
    // x + 5/2 x(1-x)(1-2x): inside (0,1) but decreasing near 1/2
    let g = from_monomial(&[0.0, 3.5, -7.5, 5.0]);
    assert!(matches!(threshold_representation(&g, DEFAULT_D_CAP), Err(Diagnosis::NotMonotone { .. })));
    let rep = outcome_representation(&g, DEFAULT_D_CAP).unwrap();
    assert!(rep.degree > 3);
    let back = rep.to_model().unwrap().recursion_polynomial::<f64>().unwrap();
    assert!(max_gap(&g, &back) < 1e-10);
}

#[test]
fn range_witness_has_no_representation() {
    // 2x^2 - x dips below zero near 1/4
    let g = BernsteinPoly::new(vec![0.0, -0.5, 1.0]).unwrap();
    assert!(matches!(outcome_representation(&g, DEFAULT_D_CAP), Err(Diagnosis::RangeViolation { .. })));
    assert!(matches!(threshold_representation(&g, DEFAULT_D_CAP), Err(Diagnosis::RangeViolation { .. })));
}

#[test]
fn endpoint_witness() {
    let g = BernsteinPoly::new(vec![0.1, 0.5, 1.0]).unwrap();
    assert!(matches!(outcome_representation(&g, DEFAULT_D_CAP), Err(Diagnosis::EndpointViolation { .. })));
}

#[test]
fn median_of_three_is_a_threshold_model() {
    let g = BernsteinPoly::new(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
    let rep = threshold_representation(&g, DEFAULT_D_CAP).unwrap();
    assert_eq!(rep.degree, 3);
    assert_eq!(rep.zeta, vec![0.0, 1.0, 0.0]);
}
