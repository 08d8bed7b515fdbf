//! Polynomials in the Bernstein basis `b_{k,d}(x) = C(d,k) x^k (1-x)^(d-k)`.
//!
//! Everything is generic over [`Scalar`], so the same code runs in double
//! precision and in exact rational arithmetic.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::models::{Rule, VotingModel};
use crate::scalar::Scalar;

/// Coefficients `β_{0..d}` of a polynomial in the degree-`d` Bernstein basis.
#[derive(Clone, Debug, PartialEq)]
pub struct BernsteinPoly<S = f64> {
    coeffs: Vec<S>,
}

/// Coefficients of `x^0, x^1, ..., x^m`, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialPoly<S = f64> {
    coeffs: Vec<S>,
}

impl<S: Scalar> MonomialPoly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_negligible()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c.clone() * S::from_i64(j as i64))
                .collect(),
        )
    }

    /// Polynomial long division, returning `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = divisor.degree();
        let lead = divisor.coeffs[dd].clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![S::zero(); rem.len() - dd];
        for shift in (0..quot.len()).rev() {
            let factor = rem[shift + dd].clone() / lead.clone();
            for (j, c) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] = rem[shift + j].clone() - factor.clone() * c.clone();
            }
            quot[shift] = factor;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Monic greatest common divisor (Euclid). Meaningful in exact arithmetic.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn monic(&self) -> Self {
        match self.coeffs.last() {
            None => self.clone(),
            Some(lead) => {
                let lead = lead.clone();
                Self::new(self.coeffs.iter().map(|c| c.clone() / lead.clone()).collect())
            }
        }
    }
}

impl<S: Scalar> BernsteinPoly<S> {
    pub fn new(coeffs: Vec<S>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidPolynomial("need at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }

    /// The constant `c` written in degree `d`.
    pub fn constant(c: S, d: usize) -> Self {
        Self { coeffs: vec![c; d + 1] }
    }

    /// The identity polynomial `x` in degree `d >= 1` (coefficients `k/d`).
    pub fn identity(d: usize) -> Self {
        assert!(d >= 1);
        Self {
            coeffs: (0..=d).map(|k| S::from_ratio(k as i64, d as i64)).collect(),
        }
    }

    /// Basis element `b_{k,d}`.
    pub fn basis(k: usize, d: usize) -> Result<Self> {
        if k > d {
            return Err(Error::IndexOutOfRange { k, d });
        }
        let mut coeffs = vec![S::zero(); d + 1];
        coeffs[k] = S::one();
        Ok(Self { coeffs })
    }

    /// Upper-tail cumulative basis `B_{k,d} = Σ_{l>=k} b_{l,d}`.
    pub fn big_b(k: usize, d: usize) -> Result<Self> {
        if k > d {
            return Err(Error::IndexOutOfRange { k, d });
        }
        Ok(Self {
            coeffs: (0..=d).map(|l| if l >= k { S::one() } else { S::zero() }).collect(),
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Evaluates the polynomial; de Casteljau inside `[0,1]`, Horner on the
    /// monomial form outside.
    pub fn eval(&self, x: &S) -> S {
        let inside = *x >= S::zero() && *x <= S::one();
        if inside {
            self.de_casteljau(x)
        } else {
            self.to_monomial().eval(x)
        }
    }

    fn de_casteljau(&self, x: &S) -> S {
        let mut work = self.coeffs.clone();
        let one_minus = S::one() - x.clone();
        let d = self.degree();
        for r in 1..=d {
            for k in 0..=(d - r) {
                work[k] = one_minus.clone() * work[k].clone() + x.clone() * work[k + 1].clone();
            }
        }
        work.swap_remove(0)
    }

    /// Same polynomial written in degree `d + 1`.
    pub fn elevate(&self) -> Self {
        let d = self.degree();
        let dp1 = S::from_i64(d as i64 + 1);
        let mut out = Vec::with_capacity(d + 2);
        out.push(self.coeffs[0].clone());
        for k in 1..=d {
            let kk = S::from_i64(k as i64);
            let left = kk.clone() / dp1.clone() * self.coeffs[k - 1].clone();
            let right = (dp1.clone() - kk) / dp1.clone() * self.coeffs[k].clone();
            out.push(left + right);
        }
        out.push(self.coeffs[d].clone());
        Self { coeffs: out }
    }

    /// Elevates repeatedly until the degree reaches `target`.
    pub fn elevate_to(&self, target: usize) -> Result<Self> {
        if target < self.degree() {
            return Err(Error::DegreeTooLow { degree: self.degree(), target });
        }
        let mut p = self.clone();
        while p.degree() < target {
            p = p.elevate();
        }
        Ok(p)
    }

    /// Derivative in degree `d-1`: `β'_k = d (β_{k+1} - β_k)`.
    ///
    /// A constant has no degree `-1` representation; it maps to the zero
    /// polynomial of degree 0.
    pub fn derivative(&self) -> Self {
        let d = self.degree();
        if d == 0 {
            return Self { coeffs: vec![S::zero()] };
        }
        let dd = S::from_i64(d as i64);
        Self {
            coeffs: self
                .coeffs
                .windows(2)
                .map(|w| dd.clone() * (w[1].clone() - w[0].clone()))
                .collect(),
        }
    }

    pub fn to_monomial(&self) -> MonomialPoly<S> {
        // a_j = C(d,j) Σ_{k<=j} (-1)^(j-k) C(j,k) β_k
        let d = self.degree();
        let coeffs = (0..=d)
            .map(|j| {
                let mut acc = S::zero();
                for k in 0..=j {
                    let term = S::binomial(j, k) * self.coeffs[k].clone();
                    if (j - k) % 2 == 0 {
                        acc = acc + term;
                    } else {
                        acc = acc - term;
                    }
                }
                S::binomial(d, j) * acc
            })
            .collect();
        MonomialPoly::new(coeffs)
    }

    /// Writes a monomial-basis polynomial in Bernstein degree `d`.
    pub fn from_monomial(m: &MonomialPoly<S>, d: usize) -> Result<Self> {
        if !m.is_zero() && m.degree() > d {
            return Err(Error::DegreeTooLow { degree: m.degree(), target: d });
        }
        // β_k = Σ_{j<=k} C(k,j)/C(d,j) a_j
        let coeffs = (0..=d)
            .map(|k| {
                m.coeffs()
                    .iter()
                    .enumerate()
                    .take(k + 1)
                    .fold(S::zero(), |acc, (j, a)| {
                        acc + S::binomial(k, j) / S::binomial(d, j) * a.clone()
                    })
            })
            .collect();
        Ok(Self { coeffs })
    }

    /// Brings two polynomials to a common degree.
    fn aligned(&self, other: &Self) -> (Self, Self) {
        let d = self.degree().max(other.degree());
        (
            self.elevate_to(d).expect("d is the max degree"),
            other.elevate_to(d).expect("d is the max degree"),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self {
            coeffs: a.coeffs.into_iter().zip(b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self {
            coeffs: a.coeffs.into_iter().zip(b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }

    pub fn scale(&self, factor: &S) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.clone() * factor.clone()).collect(),
        }
    }

    /// Restriction to `[a1, a2]` stretched back to `[0,1]`:
    /// `x ↦ f((a2 - a1) x + a1)`, same degree.
    pub fn rescale(&self, a1: &S, a2: &S) -> Result<Self> {
        if a1 >= a2 {
            return Err(Error::InvalidInterval { lo: a1.to_f64(), hi: a2.to_f64() });
        }
        let inside = *a1 >= S::zero() && *a2 <= S::one();
        if !inside {
            let m = self.to_monomial();
            let composed = compose_affine(&m, &(a2.clone() - a1.clone()), a1);
            return Self::from_monomial(&composed, self.degree());
        }
        // Subdivide at a2 (keep the left piece), then at a1/a2 (keep the right).
        let left = self.subdivide(a2).0;
        if a1.is_zero() {
            return Ok(left);
        }
        Ok(left.subdivide(&(a1.clone() / a2.clone())).1)
    }

    /// de Casteljau subdivision at `t`: coefficients of the pieces on `[0,t]`
    /// and `[t,1]`, each reparametrised to `[0,1]`.
    pub fn subdivide(&self, t: &S) -> (Self, Self) {
        let d = self.degree();
        let mut work = self.coeffs.clone();
        let one_minus = S::one() - t.clone();
        let mut left = Vec::with_capacity(d + 1);
        let mut right = Vec::with_capacity(d + 1);
        left.push(work[0].clone());
        right.push(work[d].clone());
        for r in 1..=d {
            for k in 0..=(d - r) {
                work[k] = one_minus.clone() * work[k].clone() + t.clone() * work[k + 1].clone();
            }
            left.push(work[0].clone());
            right.push(work[d - r].clone());
        }
        right.reverse();
        (Self { coeffs: left }, Self { coeffs: right })
    }

    pub fn map<T: Scalar>(&self, convert: impl Fn(&S) -> T) -> BernsteinPoly<T> {
        BernsteinPoly { coeffs: self.coeffs.iter().map(convert).collect() }
    }

    pub fn to_f64(&self) -> BernsteinPoly<f64> {
        self.map(|c| c.to_f64())
    }

    /// All coefficients within `[lo, hi]` (tolerant in the float backend).
    pub fn coeffs_within(&self, lo: &S, hi: &S) -> bool {
        self.coeffs.iter().all(|c| lo.le_tol(c) && c.le_tol(hi))
    }

    /// Coefficients nondecreasing in `k` (tolerant in the float backend).
    pub fn coeffs_nondecreasing(&self) -> bool {
        self.coeffs.windows(2).all(|w| w[0].le_tol(&w[1]))
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            basis: Basis::Bernstein,
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(Scalar::to_json).collect(),
        }
    }

    /// Reads either basis; monomial input is converted at its stated degree.
    pub fn from_json(json: &PolyJson) -> Result<Self> {
        let coeffs = json
            .coeffs
            .iter()
            .map(|v| {
                S::from_json(v)
                    .ok_or_else(|| Error::InvalidPolynomial(format!("bad coefficient {v}")))
            })
            .collect::<Result<Vec<S>>>()?;
        match json.basis {
            Basis::Bernstein => {
                if coeffs.len() != json.degree + 1 {
                    return Err(Error::InvalidPolynomial(format!(
                        "degree {} needs {} coefficients, got {}",
                        json.degree,
                        json.degree + 1,
                        coeffs.len()
                    )));
                }
                Self::new(coeffs)
            }
            Basis::Monomial => {
                let m = MonomialPoly::new(coeffs);
                Self::from_monomial(&m, json.degree.max(m.degree()))
            }
        }
    }
}

/// `p(s x + t)` in the monomial basis.
fn compose_affine<S: Scalar>(p: &MonomialPoly<S>, s: &S, t: &S) -> MonomialPoly<S> {
    // Horner with polynomial arithmetic: acc = acc * (s x + t) + c
    let mut acc: Vec<S> = Vec::new();
    for c in p.coeffs().iter().rev() {
        let mut next = vec![S::zero(); acc.len() + 1];
        for (j, a) in acc.iter().enumerate() {
            next[j] = next[j].clone() + a.clone() * t.clone();
            next[j + 1] = next[j + 1].clone() + a.clone() * s.clone();
        }
        next[0] = next[0].clone() + c.clone();
        acc = next;
    }
    MonomialPoly::new(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Bernstein,
    Monomial,
}

/// Interchange form `{"basis": ..., "degree": d, "coeffs": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub basis: Basis,
    pub degree: usize,
    pub coeffs: Vec<Value>,
}

impl<S: Scalar> MonomialPoly<S> {
    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            basis: Basis::Monomial,
            degree: self.degree(),
            coeffs: self.coeffs.iter().map(Scalar::to_json).collect(),
        }
    }
}

/// Multinomial `d! / (l! m! (d-l-m)!)`.
fn trinomial<S: Scalar>(d: usize, l: usize, m: usize) -> S {
    S::binomial(d, l) * S::binomial(d - l, m)
}

/// Right-hand side of the rescaled-nonlinearity expansion of a threshold
/// model, evaluated at `x`:
///
/// `Σ_d Σ_k Σ_{l<k} Σ_{m=k-l}^{d-l} p_d ζ_{k,d} (d; l,m,d-m-l) a1^l (a2-a1)^m (1-a2)^(d-m-l) B_{k-l,m}(x)
///  - (a2-a1) x + f(a1)`.
pub fn rescale_expansion(model: &VotingModel, a1: f64, a2: f64, x: f64) -> Result<f64> {
    let Rule::Threshold(rule) = &model.rule else {
        return Err(Error::InvalidModel("expansion needs a threshold model".into()));
    };
    let width = a2 - a1;
    let mut total = 0.0;
    for (d, p_d) in model.offspring.iter_f64() {
        for k in 1..=d {
            let zeta = rule.zeta_f64(k, d);
            if zeta == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for l in 0..k {
                for m in (k - l)..=(d - l) {
                    let weight = trinomial::<f64>(d, l, m)
                        * a1.powi(l as i32)
                        * width.powi(m as i32)
                        * (1.0 - a2).powi((d - m - l) as i32);
                    let big_b = BernsteinPoly::<f64>::big_b(k - l, m)?.eval(&x);
                    inner += weight * big_b;
                }
            }
            total += p_d * zeta * inner;
        }
    }
    let g = model.recursion_polynomial::<f64>()?;
    let f_a1 = g.eval(&a1) - a1;
    Ok(total - width * x + f_a1)
}

/// Largest deviation between `f((a2-a1)x + a1)` and its expansion over the
/// points `xs`, for the nonlinearity `f = g - x` of a threshold model.
pub fn verify_rescale_identity(model: &VotingModel, a1: f64, a2: f64, xs: &[f64]) -> Result<f64> {
    if a1 >= a2 {
        return Err(Error::InvalidInterval { lo: a1, hi: a2 });
    }
    let g = model.recursion_polynomial::<f64>()?;
    let mut worst = 0.0f64;
    for &x in xs {
        let y = (a2 - a1) * x + a1;
        let lhs = g.eval(&y) - y;
        let rhs = rescale_expansion(model, a1, a2, x)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `f̃(x) = f((a2-a1)x + a1)` as a Bernstein polynomial of the same degree.
pub fn rescale_nonlinearity<S: Scalar>(f: &BernsteinPoly<S>, a1: &S, a2: &S) -> Result<BernsteinPoly<S>> {
    f.rescale(a1, a2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn poly(c: &[f64]) -> BernsteinPoly<f64> {
        BernsteinPoly::new(c.to_vec()).unwrap()
    }

    fn rpoly(c: &[(i64, i64)]) -> BernsteinPoly<BigRational> {
        BernsteinPoly::new(c.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert!((poly(&[0.0, 0.0, 1.0]).eval(&0.5) - 0.25).abs() < 1e-15);
        assert!((poly(&[1.0; 5]).eval(&0.3) - 1.0).abs() < 1e-15);
        let b23 = rpoly(&[(0, 1), (0, 1), (1, 1), (1, 1)]);
        assert_eq!(b23.eval(&r(3, 4)), r(27, 32));
    }

    #[test]
    fn eval_outside_unit_interval_uses_monomials() {
        // 3x^2 - 2x^3 at x = -1 and x = 2
        let p = poly(&[0.0, 0.0, 1.0, 1.0]);
        assert!((p.eval(&-1.0) - 5.0).abs() < 1e-12);
        assert!((p.eval(&2.0) - (12.0 - 16.0)).abs() < 1e-12);
    }

    #[test]
    fn elevate_examples() {
        let e = rpoly(&[(0, 1), (0, 1), (1, 1)]).elevate();
        assert_eq!(e, rpoly(&[(0, 1), (0, 1), (1, 3), (1, 1)]));
        let c = rpoly(&[(2, 7), (2, 7)]).elevate();
        assert_eq!(c, rpoly(&[(2, 7), (2, 7), (2, 7)]));
        assert_eq!(rpoly(&[(0, 1), (1, 1)]).elevate(), rpoly(&[(0, 1), (1, 2), (1, 1)]));
    }

    #[test]
    fn derivative_examples() {
        let d = rpoly(&[(0, 1), (0, 1), (1, 1), (1, 1)]).derivative();
        assert_eq!(d, rpoly(&[(0, 1), (3, 1), (0, 1)]));
        assert_eq!(rpoly(&[(0, 1), (1, 1)]).derivative(), rpoly(&[(1, 1)]));
        assert_eq!(rpoly(&[(1, 1), (1, 1), (1, 1)]).derivative(), rpoly(&[(0, 1), (0, 1)]));
        assert_eq!(rpoly(&[(5, 1)]).derivative(), rpoly(&[(0, 1)]));
    }

    #[test]
    fn monomial_conversion_examples() {
        let x2 = MonomialPoly::new(vec![r(0, 1), r(0, 1), r(1, 1)]);
        assert_eq!(BernsteinPoly::from_monomial(&x2, 2).unwrap(), rpoly(&[(0, 1), (0, 1), (1, 1)]));
        let cubic = MonomialPoly::new(vec![r(0, 1), r(0, 1), r(3, 1), r(-2, 1)]);
        assert_eq!(
            BernsteinPoly::from_monomial(&cubic, 3).unwrap(),
            rpoly(&[(0, 1), (0, 1), (1, 1), (1, 1)])
        );
        let zero = MonomialPoly::<BigRational>::zero();
        assert_eq!(BernsteinPoly::from_monomial(&zero, 5).unwrap().coeffs(), &vec![r(0, 1); 6][..]);
        assert!(BernsteinPoly::from_monomial(&cubic, 2).is_err());
        assert_eq!(rpoly(&[(0, 1), (0, 1), (1, 1), (1, 1)]).to_monomial(), cubic);
    }

    #[test]
    fn big_b_examples() {
        let d = 5;
        assert_eq!(BernsteinPoly::<BigRational>::big_b(0, d).unwrap(), BernsteinPoly::constant(r(1, 1), d));
        assert_eq!(BernsteinPoly::<BigRational>::big_b(d, d).unwrap(), BernsteinPoly::basis(d, d).unwrap());
        assert_eq!(BernsteinPoly::<BigRational>::big_b(2, 3).unwrap().eval(&r(1, 2)), r(1, 2));
        assert!(BernsteinPoly::<f64>::big_b(4, 3).is_err());
    }

    #[test]
    fn rescale_examples() {
        // f = 3x^2 - 2x^3 - x
        let f = rpoly(&[(0, 1), (0, 1), (1, 1), (1, 1)]).sub(&BernsteinPoly::identity(3));
        let left = f.rescale(&r(0, 1), &r(1, 2)).unwrap();
        assert_eq!(left.eval(&r(0, 1)), r(0, 1));
        assert_eq!(left.eval(&r(1, 1)), r(0, 1));
        // against direct substitution x -> x/2
        for i in 0..=10 {
            let x = r(i, 10);
            assert_eq!(left.eval(&x), f.eval(&(x.clone() / r(2, 1))));
        }
        assert_eq!(f.rescale(&r(0, 1), &r(1, 1)).unwrap(), f);
        let right = f.rescale(&r(1, 2), &r(1, 1)).unwrap();
        assert_eq!(right.eval(&r(1, 1)), f.eval(&r(1, 1)));
        assert!(f.rescale(&r(1, 2), &r(1, 2)).is_err());
    }

    #[test]
    fn polynomial_gcd_finds_repeated_factor() {
        // (x - 1/2)^2 (x + 1) and its derivative share (x - 1/2)
        let p = MonomialPoly::new(vec![r(1, 4), r(-3, 4), r(0, 1), r(1, 1)]);
        let g = p.gcd(&p.derivative());
        assert_eq!(g, MonomialPoly::new(vec![r(-1, 2), r(1, 1)]));
    }

    #[test]
    fn json_round_trip_rational() {
        let p = rpoly(&[(0, 1), (1, 3), (27, 32)]);
        let json = p.to_json();
        assert_eq!(json.coeffs[1], Value::String("1/3".into()));
        assert_eq!(json.coeffs[2], Value::String("0.84375".into()));
        let text = serde_json::to_string(&json).unwrap();
        let back: PolyJson = serde_json::from_str(&text).unwrap();
        assert_eq!(BernsteinPoly::<BigRational>::from_json(&back).unwrap(), p);
    }

    #[test]
    fn json_monomial_input() {
        let json: PolyJson =
            serde_json::from_str(r#"{"basis":"monomial","degree":3,"coeffs":[0,0,3,-2]}"#).unwrap();
        let p = BernsteinPoly::<BigRational>::from_json(&json).unwrap();
        assert_eq!(p, rpoly(&[(0, 1), (0, 1), (1, 1), (1, 1)]));
    }
}
