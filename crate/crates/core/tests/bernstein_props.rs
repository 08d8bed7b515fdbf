use proptest::prelude::*;
use votewave::bernstein::{verify_rescale_identity, BernsteinPoly, MonomialPoly};
use votewave::models::{OffspringLaw, Rule, ThresholdRule, VotingModel};

mod common;

fn b(k: usize, d: usize, x: f64) -> f64 {
    BernsteinPoly::<f64>::basis(k, d).unwrap().eval(&x)
}

fn big_b(k: usize, d: usize, x: f64) -> f64 {
    BernsteinPoly::<f64>::big_b(k, d).unwrap().eval(&x)
}

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<f64>> {
    (0..=max_degree).prop_flat_map(|d| prop::collection::vec(-2.0f64..2.0, d + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn partition_of_unity(d in 0usize..=20, x in 0.0f64..=1.0) {
        let total: f64 = (0..=d).map(|k| b(k, d, x)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn elevation_preserves_values(c in coeffs(12), extra in 1usize..6, x in 0.0f64..=1.0) {
        let p = BernsteinPoly::new(c).unwrap();
        let q = p.elevate_to(p.degree() + extra).unwrap();
        prop_assert!((p.eval(&x) - q.eval(&x)).abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_finite_difference(c in coeffs(10), x in 0.01f64..0.99) {
        let p = BernsteinPoly::new(c).unwrap();
        let h = 1e-6;
        let fd = (p.eval(&(x + h)) - p.eval(&(x - h))) / (2.0 * h);
        prop_assert!((p.derivative().eval(&x) - fd).abs() < 1e-6);
    }

    #[test]
    fn degree_lowering_identity(d in 1usize..=12, k_frac in 0.0f64..1.0, x in 0.0f64..=1.0) {
        let k = ((k_frac * d as f64) as usize).min(d - 1);
        let df = d as f64;
        let rhs = (df - k as f64) / df * b(k, d, x) + (k as f64 + 1.0) / df * b(k + 1, d, x);
        prop_assert!((b(k, d - 1, x) - rhs).abs() < 1e-12);
    }

    #[test]
    fn upper_tail_one_step_identity(d in 1usize..=12, k_frac in 0.0f64..1.0, x in 0.0f64..=1.0) {
        let k = 1 + ((k_frac * d as f64) as usize).min(d - 1);
        let d1 = (d + 1) as f64;
        let rhs = (d1 - k as f64) / d1 * big_b(k, d + 1, x) + k as f64 / d1 * big_b(k + 1, d + 1, x);
        prop_assert!((big_b(k, d, x) - rhs).abs() < 1e-12);
    }

    #[test]
    fn monomial_round_trip(c in coeffs(10), x in 0.0f64..=1.0) {
        let p = BernsteinPoly::new(c).unwrap();
        let m = p.to_monomial();
        let back = BernsteinPoly::from_monomial(&m, p.degree()).unwrap();
        prop_assert!((m.eval(&x) - p.eval(&x)).abs() < 1e-10);
        prop_assert!((back.eval(&x) - p.eval(&x)).abs() < 1e-10);
    }

    #[test]
    fn rescaled_nonlinearity_expansion(seed in any::<u64>(), a in 0.0f64..1.0, b_ in 0.0f64..1.0) {
        prop_assume!((a - b_).abs() > 1e-3);
        let case = common::random_case(seed);
        let model = case.model();
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let residual = verify_rescale_identity(&model, a.min(b_), a.max(b_), &xs).unwrap();
        prop_assert!(residual < 1e-10, "residual {residual}");
    }

    #[test]
    fn rescale_matches_composition(c in coeffs(8), a in 0.0f64..0.5, w in 0.1f64..0.5, x in 0.0f64..=1.0) {
        let p = BernsteinPoly::new(c).unwrap();
        let r = p.rescale(&a, &(a + w)).unwrap();
        prop_assert!((r.eval(&x) - p.eval(&(a + w * x))).abs() < 1e-10);
    }
}

#[test]
fn degree_ten_rescale_contract() {
    let zeta = (1..=10).map(|k| ((k, 10), common::rat(1, 10))).collect();
    let model = VotingModel::new(OffspringLaw::fixed(10), Rule::Threshold(ThresholdRule::new(zeta))).unwrap();
    let xs: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    assert!(verify_rescale_identity(&model, 0.2, 0.9, &xs).unwrap() < 1e-10);
}

#[test]
fn monomial_eval_is_horner() {
    let m = MonomialPoly::new(vec![1.0, -2.0, 3.0]);
    assert_eq!(m.eval(&2.0), 9.0);
}
