//! Voting models, their recursion polynomials, and the representability
//! questions running the other way (which `g` come from which voting rule).

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Map, Value};

use crate::bernstein::{BernsteinPoly, MonomialPoly};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, Scalar, FLOAT_TOL};

/// Default elevation cap for the representation searches.
pub const DEFAULT_D_CAP: usize = 256;

/// Offspring distribution `p_d`, `1 <= d <= d_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct OffspringLaw {
    probs: BTreeMap<usize, BigRational>,
}

impl OffspringLaw {
    pub fn new(probs: BTreeMap<usize, BigRational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidModel("offspring law is empty".into()));
        }
        let mut total = 0.0;
        for (&d, p) in &probs {
            if d == 0 {
                return Err(Error::InvalidModel("offspring counts start at 1".into()));
            }
            if p.is_negative() {
                return Err(Error::InvalidModel(format!("p_{d} is negative")));
            }
            total += p.to_f64();
        }
        if (total - 1.0).abs() > FLOAT_TOL {
            return Err(Error::InvalidModel(format!("offspring probabilities sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Every parent has exactly `d` children.
    pub fn fixed(d: usize) -> Self {
        Self { probs: BTreeMap::from([(d, BigRational::one())]) }
    }

    pub fn d_max(&self) -> usize {
        *self.probs.keys().next_back().expect("nonempty")
    }

    pub fn prob(&self, d: usize) -> BigRational {
        self.probs.get(&d).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Offspring counts with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, &BigRational)> {
        self.probs.iter().filter(|(_, p)| p.is_positive()).map(|(&d, p)| (d, p))
    }

    pub fn iter_f64(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support().map(|(d, p)| (d, p.to_f64()))
    }
}

/// Threshold weights `ζ_{k,d} = P[L_v = k | d(v) = d]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ThresholdRule {
    zeta: BTreeMap<(usize, usize), BigRational>,
}

impl ThresholdRule {
    pub fn new(zeta: BTreeMap<(usize, usize), BigRational>) -> Self {
        Self { zeta }
    }

    pub fn zeta(&self, k: usize, d: usize) -> BigRational {
        self.zeta.get(&(k, d)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn zeta_f64(&self, k: usize, d: usize) -> f64 {
        self.zeta(k, d).to_f64()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &BigRational)> {
        self.zeta.iter().map(|(&kd, z)| (kd, z))
    }
}

/// Outcome weights `α_{k,d}`: vote 1 with this probability when `k` of `d`
/// children voted 1.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct OutcomeRule {
    alpha: BTreeMap<(usize, usize), BigRational>,
}

impl OutcomeRule {
    pub fn new(alpha: BTreeMap<(usize, usize), BigRational>) -> Self {
        Self { alpha }
    }

    pub fn alpha(&self, k: usize, d: usize) -> BigRational {
        self.alpha.get(&(k, d)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn alpha_f64(&self, k: usize, d: usize) -> f64 {
        self.alpha(k, d).to_f64()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &BigRational)> {
        self.alpha.iter().map(|(&kd, a)| (kd, a))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Threshold(ThresholdRule),
    Outcome(OutcomeRule),
}

#[derive(Clone, Debug, PartialEq)]
pub struct VotingModel {
    pub offspring: OffspringLaw,
    pub rule: Rule,
}

impl VotingModel {
    pub fn new(offspring: OffspringLaw, rule: Rule) -> Result<Self> {
        let model = Self { offspring, rule };
        model.validate()?;
        Ok(model)
    }

    pub fn is_threshold(&self) -> bool {
        matches!(self.rule, Rule::Threshold(_))
    }

    pub fn d_max(&self) -> usize {
        self.offspring.d_max()
    }

    fn validate(&self) -> Result<()> {
        let d_max = self.d_max();
        match &self.rule {
            Rule::Threshold(rule) => {
                for ((k, d), z) in rule.entries() {
                    if k == 0 || k > d || d > d_max {
                        return Err(Error::InvalidModel(format!("zeta index ({k},{d}) out of range")));
                    }
                    if z.is_negative() || *z > BigRational::one() {
                        return Err(Error::InvalidModel(format!("zeta ({k},{d}) outside [0,1]")));
                    }
                }
                for (d, _) in self.offspring.support() {
                    let row: f64 = (1..=d).map(|k| rule.zeta_f64(k, d)).sum();
                    if (row - 1.0).abs() > FLOAT_TOL {
                        return Err(Error::InvalidModel("zeta rows must sum to 1".into()));
                    }
                }
            }
            Rule::Outcome(rule) => {
                for ((k, d), a) in rule.entries() {
                    if k > d || d > d_max || d == 0 {
                        return Err(Error::InvalidModel(format!("alpha index ({k},{d}) out of range")));
                    }
                    if a.is_negative() || *a > BigRational::one() {
                        return Err(Error::InvalidModel(format!("alpha ({k},{d}) outside [0,1]")));
                    }
                }
                for (d, _) in self.offspring.support() {
                    if !rule.alpha(0, d).is_zero() {
                        return Err(Error::InvalidModel(format!("alpha_(0,{d}) must be 0")));
                    }
                    if !rule.alpha(d, d).is_one() {
                        return Err(Error::InvalidModel(format!("alpha_({d},{d}) must be 1")));
                    }
                }
            }
        }
        Ok(())
    }

    /// The recursion polynomial `g`, canonicalised to degree `d_0`.
    pub fn recursion_polynomial<S: Scalar>(&self) -> Result<BernsteinPoly<S>> {
        match &self.rule {
            Rule::Threshold(_) => build_threshold_g(self),
            Rule::Outcome(_) => build_outcome_g(self),
        }
    }

    /// Reads `{"offspring": {"d": p}, "rule": {"type": ..., "zeta"|"alpha": {"k,d": w}}}`.
    pub fn from_json(value: &Value) -> Result<Self> {
        let offspring = value
            .get("offspring")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Config("missing \"offspring\" object".into()))?;
        let mut probs = BTreeMap::new();
        for (key, p) in offspring {
            let d: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad offspring count {key:?}")))?;
            probs.insert(d, weight(p)?);
        }
        let offspring = OffspringLaw::new(probs)?;
        let rule = value
            .get("rule")
            .ok_or_else(|| Error::Config("missing \"rule\" object".into()))?;
        let kind = rule.get("type").and_then(Value::as_str).unwrap_or("threshold");
        let rule = match kind {
            "threshold" => Rule::Threshold(ThresholdRule::new(weight_table(rule, "zeta")?)),
            "outcome" => Rule::Outcome(OutcomeRule::new(weight_table(rule, "alpha")?)),
            other => return Err(Error::Config(format!("unknown rule type {other:?}"))),
        };
        Self::new(offspring, rule)
    }

    /// JSON form with weights as decimal (or `p/q`) strings.
    pub fn to_json(&self) -> Value {
        let offspring: Map<String, Value> = self
            .offspring
            .probs
            .iter()
            .map(|(d, p)| (d.to_string(), Value::String(format_rational(p))))
            .collect();
        let (kind, name, table) = match &self.rule {
            Rule::Threshold(r) => ("threshold", "zeta", &r.zeta),
            Rule::Outcome(r) => ("outcome", "alpha", &r.alpha),
        };
        let table: Map<String, Value> = table
            .iter()
            .map(|((k, d), w)| (format!("{k},{d}"), Value::String(format_rational(w))))
            .collect();
        json!({"offspring": offspring, "rule": {"type": kind, name: table}})
    }
}

fn weight(value: &Value) -> Result<BigRational> {
    <BigRational as Scalar>::from_json(value)
        .ok_or_else(|| Error::Config(format!("bad weight {value}")))
}

fn weight_table(rule: &Value, name: &str) -> Result<BTreeMap<(usize, usize), BigRational>> {
    let table = rule
        .get(name)
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Config(format!("missing \"{name}\" table")))?;
    let mut out = BTreeMap::new();
    for (key, w) in table {
        let (k, d) = key
            .split_once(',')
            .and_then(|(k, d)| Some((k.trim().parse().ok()?, d.trim().parse().ok()?)))
            .ok_or_else(|| Error::Config(format!("bad index {key:?}, expected \"k,d\"")))?;
        out.insert((k, d), weight(w)?);
    }
    Ok(out)
}

/// `g = Σ_d Σ_k p_d ζ_{k,d} B_{k,d}`, each term elevated to `d_0` first.
pub fn build_threshold_g<S: Scalar>(model: &VotingModel) -> Result<BernsteinPoly<S>> {
    let Rule::Threshold(rule) = &model.rule else {
        return Err(Error::InvalidModel("expected a threshold model".into()));
    };
    model.validate()?;
    let d0 = model.d_max();
    let mut g = BernsteinPoly::constant(S::zero(), d0);
    for (d, p) in model.offspring.support() {
        let p = S::from_rational(p);
        // Σ_k ζ_k B_{k,d} has coefficients Σ_{k<=l} ζ_k at index l.
        let mut running = S::zero();
        let mut coeffs = Vec::with_capacity(d + 1);
        coeffs.push(S::zero());
        for k in 1..=d {
            running = running + S::from_rational(&rule.zeta(k, d));
            coeffs.push(running.clone());
        }
        let term = BernsteinPoly::new(coeffs)?.scale(&p);
        g = g.add(&term.elevate_to(d0)?);
    }
    Ok(g)
}

/// `g = Σ_d Σ_k p_d α_{k,d} b_{k,d}`, canonicalised to degree `d_0`.
pub fn build_outcome_g<S: Scalar>(model: &VotingModel) -> Result<BernsteinPoly<S>> {
    let Rule::Outcome(rule) = &model.rule else {
        return Err(Error::InvalidModel("expected an outcome model".into()));
    };
    model.validate()?;
    let d0 = model.d_max();
    let mut g = BernsteinPoly::constant(S::zero(), d0);
    for (d, p) in model.offspring.support() {
        let p = S::from_rational(p);
        let coeffs = (0..=d).map(|k| S::from_rational(&rule.alpha(k, d))).collect();
        let term = BernsteinPoly::new(coeffs)?.scale(&p);
        g = g.add(&term.elevate_to(d0)?);
    }
    Ok(g)
}

/// Zero structure and stability flags of `f = g - x`.
#[derive(Clone, Debug)]
pub struct Nonlinearity {
    pub g: BernsteinPoly<f64>,
    pub f: BernsteinPoly<f64>,
    /// `0 = α_0 < α_1 < ... < α_{N_f+1} = 1`.
    pub zeros: Vec<f64>,
    /// Multiplicity of each listed zero.
    pub multiplicities: Vec<usize>,
    pub monotone_g: bool,
    pub bistable: bool,
    g_prime: BernsteinPoly<f64>,
}

const SCAN_STEPS: usize = 10_000;
const BISECT_TOL: f64 = 1e-12;
const SIMPLE_ZERO_SLOPE: f64 = 1e-8;

impl Nonlinearity {
    /// Number of zeros of `f` strictly inside `(0,1)`.
    pub fn interior_zero_count(&self) -> usize {
        self.zeros.len() - 2
    }

    /// The unstable level `ϑ` of a bistable nonlinearity.
    pub fn theta(&self) -> Option<f64> {
        self.bistable.then(|| self.zeros[1])
    }

    pub fn df0(&self) -> f64 {
        self.g_prime.eval(&0.0) - 1.0
    }

    pub fn df1(&self) -> f64 {
        self.g_prime.eval(&1.0) - 1.0
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        self.g_prime.eval(&x)
    }

    /// `g` inside `[0,1]`; outside, the linear continuation `x + f'(0) x`
    /// (left) and `x + f'(1)(x - 1)` (right).
    pub fn extend_g(&self, x: f64) -> f64 {
        if x < 0.0 {
            x + self.df0() * x
        } else if x > 1.0 {
            x + self.df1() * (x - 1.0)
        } else {
            self.g.eval(&x)
        }
    }

    /// Inverse of `g` on `[0,1]` by bisection; `g` must be monotone.
    pub fn g_inverse(&self, level: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.g.eval(&mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    fn assemble(g: BernsteinPoly<f64>, zeros: Vec<f64>, multiplicities: Vec<usize>) -> Self {
        let d = g.degree().max(1);
        let f = g.sub(&BernsteinPoly::identity(d));
        let g_prime = g.derivative();
        let monotone_g = (1..SCAN_STEPS).all(|i| g_prime.eval(&(i as f64 / SCAN_STEPS as f64)) > 0.0);
        let mut out = Self { g, f, zeros, multiplicities, monotone_g, bistable: false, g_prime };
        out.bistable = out.zeros.len() == 3
            && out.multiplicities[1] == 1
            && out.df0() < 0.0
            && out.df1() < 0.0;
        out
    }
}

fn bisect(poly: &BernsteinPoly<f64>, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = poly.eval(&lo);
    while hi - lo > BISECT_TOL {
        let mid = 0.5 * (lo + hi);
        let f_mid = poly.eval(&mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Sign-change roots of `p` in `(0,1)` on the scan grid, refined by bisection.
fn sign_change_roots(p: &BernsteinPoly<f64>) -> Vec<f64> {
    let xs: Vec<f64> = (1..SCAN_STEPS).map(|i| i as f64 / SCAN_STEPS as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|x| p.eval(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if vals[i] == 0.0 {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < xs.len() && vals[i + 1] != 0.0 && (vals[i] > 0.0) != (vals[i + 1] > 0.0) {
            roots.push(bisect(p, xs[i], xs[i + 1]));
        }
    }
    roots
}

fn check_endpoints(g: &BernsteinPoly<f64>) -> Result<()> {
    let (g0, g1) = (g.eval(&0.0), g.eval(&1.0));
    if g0.abs() > 1e-10 || (g1 - 1.0).abs() > 1e-10 {
        return Err(Error::Endpoints { g0, g1 });
    }
    Ok(())
}

/// Zeros of `f = g - x` in double precision. Only simple zeros are
/// accepted; a tangential zero is reported as [`Error::DegenerateZero`].
pub fn analyze(g: &BernsteinPoly<f64>) -> Result<Nonlinearity> {
    check_endpoints(g)?;
    let d = g.degree().max(1);
    let f = g.sub(&BernsteinPoly::identity(d));
    if f.coeffs().iter().all(|c| c.abs() <= FLOAT_TOL) {
        return Err(Error::IdenticallyZero);
    }
    let df = f.derivative();
    let roots = sign_change_roots(&f);
    for &r in &roots {
        if df.eval(&r).abs() < SIMPLE_ZERO_SLOPE {
            return Err(Error::DegenerateZero { at: r });
        }
    }
    // Touching zeros do not change sign: look at the extrema of f instead.
    for extremum in sign_change_roots(&df) {
        let near_known = roots.iter().any(|r| (r - extremum).abs() < 1e-6);
        if !near_known && f.eval(&extremum).abs() < FLOAT_TOL {
            return Err(Error::DegenerateZero { at: extremum });
        }
    }
    let mut zeros = vec![0.0];
    zeros.extend(&roots);
    zeros.push(1.0);
    let multiplicities = vec![1; zeros.len()];
    Ok(Nonlinearity::assemble(g.clone(), zeros, multiplicities))
}

/// Zeros of `f = g - x` from exact coefficients. Repeated zeros are located
/// through the square-free part of `f` and reported with their multiplicity.
pub fn analyze_exact(g: &BernsteinPoly<BigRational>) -> Result<Nonlinearity> {
    let (g0, g1) = (g.eval(&BigRational::zero()), g.eval(&BigRational::one()));
    if !g0.is_zero() || !g1.is_one() {
        return Err(Error::Endpoints { g0: g0.to_f64(), g1: g1.to_f64() });
    }
    let d = g.degree().max(1);
    let f = g.sub(&BernsteinPoly::identity(d));
    let fm = f.to_monomial();
    if fm.is_zero() {
        return Err(Error::IdenticallyZero);
    }
    let (square_free, _) = fm.div_rem(&fm.gcd(&fm.derivative()));
    let sf = BernsteinPoly::from_monomial(&square_free, square_free.degree().max(1))?.to_f64();
    let roots = sign_change_roots(&sf);

    // multiplicity: count how many successive gcds still vanish at the root
    let mut chain = Vec::new();
    let mut current = fm.clone();
    loop {
        let next = current.gcd(&current.derivative());
        if next.degree() == 0 {
            break;
        }
        chain.push(next.clone());
        current = next;
    }
    let multiplicity = |x: f64| -> usize {
        1 + chain
            .iter()
            .take_while(|p| {
                let (sf_p, _) = p.div_rem(&p.gcd(&p.derivative()));
                sf_p.degree() > 0 && vanishes_near(&sf_p, x)
            })
            .count()
    };
    let mut zeros = vec![0.0];
    let mut multiplicities = vec![multiplicity(0.0)];
    for &r in &roots {
        zeros.push(r);
        multiplicities.push(multiplicity(r));
    }
    zeros.push(1.0);
    multiplicities.push(multiplicity(1.0));
    Ok(Nonlinearity::assemble(g.to_f64(), zeros, multiplicities))
}

fn vanishes_near(p: &MonomialPoly<BigRational>, x: f64) -> bool {
    let pf = MonomialPoly::new(p.coeffs().iter().map(Scalar::to_f64).collect::<Vec<f64>>());
    let scale = pf.coeffs().iter().map(|c| c.abs()).fold(0.0, f64::max);
    let (a, b) = (pf.eval(&(x - 1e-7)), pf.eval(&(x + 1e-7)));
    pf.eval(&x).abs() <= 1e-9 * scale || (a > 0.0) != (b > 0.0)
}

/// Why a polynomial has no representation within the elevation cap.
#[derive(Clone, Debug, PartialEq)]
pub enum Diagnosis {
    /// `g(0) = 0` and `g(1) = 1` fail.
    EndpointViolation { g0: f64, g1: f64 },
    /// A sampled interior value leaves `(0,1)`.
    RangeViolation { x: f64, value: f64 },
    /// `g' <= 0` at a sampled interior point.
    NotMonotone { x: f64, slope: f64 },
    /// Conditions look satisfied but the cap was hit first.
    CapReached { d_cap: usize },
}

impl fmt::Display for Diagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnosis::EndpointViolation { g0, g1 } => {
                write!(f, "violates g(0)=0, g(1)=1 (g(0)={g0}, g(1)={g1})")
            }
            Diagnosis::RangeViolation { x, value } => write!(f, "violates 0<g<1: g({x})={value}"),
            Diagnosis::NotMonotone { x, slope } => write!(f, "not monotone: g'({x})={slope}"),
            Diagnosis::CapReached { d_cap } => write!(f, "cap reached at degree {d_cap}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeRepresentation<S = f64> {
    pub degree: usize,
    /// `α_{k,d}` for `k = 0..=d`.
    pub alpha: Vec<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRepresentation<S = f64> {
    pub degree: usize,
    /// `ζ_{k,d}` for `k = 1..=d`, stored at index `k - 1`.
    pub zeta: Vec<S>,
}

impl<S: Scalar> OutcomeRepresentation<S> {
    pub fn to_model(&self) -> Result<VotingModel> {
        let d = self.degree;
        let alpha = self
            .alpha
            .iter()
            .enumerate()
            .map(|(k, a)| ((k, d), a.to_rational()))
            .collect();
        VotingModel::new(OffspringLaw::fixed(d), Rule::Outcome(OutcomeRule::new(alpha)))
    }
}

impl<S: Scalar> ThresholdRepresentation<S> {
    pub fn to_model(&self) -> Result<VotingModel> {
        let d = self.degree;
        let zeta = self
            .zeta
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(i, z)| ((i + 1, d), z.to_rational()))
            .collect();
        VotingModel::new(OffspringLaw::fixed(d), Rule::Threshold(ThresholdRule::new(zeta)))
    }

    /// `{"d": d, "zeta": {"k,d": value}}` listing the nonzero weights.
    pub fn to_json(&self) -> Value {
        let d = self.degree;
        let zeta: Map<String, Value> = self
            .zeta
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_negligible())
            .map(|(i, z)| (format!("{},{d}", i + 1), Value::from(z.to_f64())))
            .collect();
        json!({"d": d, "zeta": zeta})
    }
}

impl<S: Scalar> OutcomeRepresentation<S> {
    pub fn to_json(&self) -> Value {
        let d = self.degree;
        let alpha: Map<String, Value> = self
            .alpha
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_negligible())
            .map(|(k, a)| (format!("{k},{d}"), Value::from(a.to_f64())))
            .collect();
        json!({"d": d, "alpha": alpha})
    }
}

const SAMPLE_POINTS: usize = 2000;

fn interior_samples() -> impl Iterator<Item = f64> {
    (1..SAMPLE_POINTS).map(|i| i as f64 / SAMPLE_POINTS as f64)
}

fn endpoint_diagnosis<S: Scalar>(g: &BernsteinPoly<S>) -> Option<Diagnosis> {
    let g0 = g.coeffs()[0].clone();
    let g1 = g.coeffs()[g.degree()].clone();
    (!g0.is_close(&S::zero()) || !g1.is_close(&S::one()))
        .then(|| Diagnosis::EndpointViolation { g0: g0.to_f64(), g1: g1.to_f64() })
}

/// First sampled interior point where `g` leaves `(lo_margin, 1 - lo_margin)`.
fn range_violation(g: &BernsteinPoly<f64>, margin: f64) -> Option<Diagnosis> {
    interior_samples().find_map(|x| {
        let value = g.eval(&x);
        (value <= -margin || value >= 1.0 + margin).then_some(Diagnosis::RangeViolation { x, value })
    })
}

fn slope_violation(g: &BernsteinPoly<f64>, margin: f64) -> Option<Diagnosis> {
    let dg = g.derivative();
    interior_samples().find_map(|x| {
        let slope = dg.eval(&x);
        (slope <= -margin).then_some(Diagnosis::NotMonotone { x, slope })
    })
}

/// Random outcome model with recursion polynomial `g`, if one exists within
/// the elevation cap: the Bernstein coefficients once they all lie in `[0,1]`.
pub fn outcome_representation<S: Scalar>(
    g: &BernsteinPoly<S>,
    d_cap: usize,
) -> std::result::Result<OutcomeRepresentation<S>, Diagnosis> {
    if let Some(diag) = endpoint_diagnosis(g) {
        return Err(diag);
    }
    let gf = g.to_f64();
    if let Some(diag) = range_violation(&gf, 1e-9) {
        return Err(diag);
    }
    let (zero, one) = (S::zero(), S::one());
    let mut current = g.clone();
    loop {
        if current.coeffs_within(&zero, &one) {
            let d = current.degree();
            let mut alpha: Vec<S> = current
                .into_coeffs()
                .into_iter()
                .map(|a| clamp_unit(a))
                .collect();
            alpha[0] = S::zero();
            alpha[d] = S::one();
            return Ok(OutcomeRepresentation { degree: d, alpha });
        }
        if current.degree() >= d_cap {
            return Err(range_violation(&gf, 0.0).unwrap_or(Diagnosis::CapReached { d_cap }));
        }
        current = current.elevate();
    }
}

/// Random threshold model (single offspring count, `p_d = 1`) with recursion
/// polynomial `g`, if one exists within the cap. Needs coefficients in
/// `[0,1]` that are also nondecreasing; then `ζ_k = α_k - α_{k-1}`.
pub fn threshold_representation<S: Scalar>(
    g: &BernsteinPoly<S>,
    d_cap: usize,
) -> std::result::Result<ThresholdRepresentation<S>, Diagnosis> {
    if let Some(diag) = endpoint_diagnosis(g) {
        return Err(diag);
    }
    let gf = g.to_f64();
    if let Some(diag) = range_violation(&gf, 1e-9).or_else(|| slope_violation(&gf, 1e-9)) {
        return Err(diag);
    }
    let (zero, one) = (S::zero(), S::one());
    let mut current = g.clone();
    loop {
        if current.coeffs_within(&zero, &one) && current.coeffs_nondecreasing() {
            let d = current.degree();
            let mut alpha: Vec<S> = current.into_coeffs().into_iter().map(clamp_unit).collect();
            alpha[0] = S::zero();
            alpha[d] = S::one();
            let zeta: Vec<S> = alpha
                .windows(2)
                .map(|w| {
                    let z = w[1].clone() - w[0].clone();
                    if z < S::zero() { S::zero() } else { z }
                })
                .collect();
            let total = zeta.iter().fold(S::zero(), |acc, z| acc + z.clone());
            debug_assert!(total.is_close(&S::one()));
            return Ok(ThresholdRepresentation { degree: d, zeta });
        }
        if current.degree() >= d_cap {
            let diag = slope_violation(&gf, 0.0)
                .or_else(|| range_violation(&gf, 0.0))
                .unwrap_or(Diagnosis::CapReached { d_cap });
            return Err(diag);
        }
        current = current.elevate();
    }
}

fn clamp_unit<S: Scalar>(a: S) -> S {
    if a < S::zero() {
        S::zero()
    } else if a > S::one() {
        S::one()
    } else {
        a
    }
}

/// Ready-made models used across tests, examples and the CLI.
pub mod presets {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    fn threshold(offspring: &[(usize, BigRational)], zeta: &[((usize, usize), BigRational)]) -> VotingModel {
        let probs = offspring.iter().cloned().collect();
        let zeta = zeta.iter().cloned().collect();
        VotingModel::new(
            OffspringLaw::new(probs).expect("preset offspring law"),
            Rule::Threshold(ThresholdRule::new(zeta)),
        )
        .expect("preset model")
    }

    /// `p_4 = 1`, `ζ_{3,4} = ζ_{2,4} = 1/2`: two clusters, both tight around the ϑ-quantile.
    pub fn fig1a() -> VotingModel {
        threshold(&[(4, rat(1, 1))], &[((3, 4), rat(1, 2)), ((2, 4), rat(1, 2))])
    }

    /// `p_4 = 1`, `ζ = (5/16, 5/48, 19/48, 3/16)`: one cluster drifts away.
    pub fn fig1b() -> VotingModel {
        threshold(
            &[(4, rat(1, 1))],
            &[((4, 4), rat(3, 16)), ((3, 4), rat(19, 48)), ((2, 4), rat(5, 48)), ((1, 4), rat(5, 16))],
        )
    }

    /// `p_4 = 1`, `ζ = (5/16, 3/16, 3/16, 5/16)`: both clusters drift away.
    pub fn fig1c() -> VotingModel {
        threshold(
            &[(4, rat(1, 1))],
            &[((4, 4), rat(5, 16)), ((3, 4), rat(3, 16)), ((2, 4), rat(3, 16)), ((1, 4), rat(5, 16))],
        )
    }

    /// Ternary branching, parent takes the median child.
    pub fn ternary_median() -> VotingModel {
        threshold(&[(3, rat(1, 1))], &[((2, 3), rat(1, 1))])
    }

    /// `p_2 = p`, `p_3 = 1 - p`, `ζ_{2,2} = ζ_{2,3} = 1`.
    pub fn binary_ternary(p: BigRational) -> VotingModel {
        let q = BigRational::one() - p.clone();
        threshold(&[(2, p), (3, q)], &[((2, 2), rat(1, 1)), ((2, 3), rat(1, 1))])
    }

    /// `d` children, parent takes the maximum.
    pub fn maximum(d: usize) -> VotingModel {
        threshold(&[(d, rat(1, 1))], &[((d, d), rat(1, 1))])
    }
}
