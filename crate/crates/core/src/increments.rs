//! Increment laws `q` of the branching random walk: finitely many atoms, or
//! a density sampled on a uniform grid.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Scalar};

const MASS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub x: BigRational,
    pub w: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Atomic(Vec<Atom>),
    /// `samples[i] = q(lo + i h)`; zero outside `[lo, lo + (len-1) h]`.
    Density { lo: f64, h: f64, samples: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct IncrementLaw {
    kind: Kind,
    /// Cumulative distribution at the atoms, or at the density grid points.
    cdf: Vec<f64>,
}

/// Convolution kernel on a lattice of spacing `h`:
/// `(q * F)(x_i) = Σ_j weights[j] F(x_{i - (start + j)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel<S> {
    pub start: i64,
    pub weights: Vec<S>,
}

impl<S: Scalar> Kernel<S> {
    pub fn end(&self) -> i64 {
        self.start + self.weights.len() as i64 - 1
    }

    /// Largest absolute lattice offset.
    pub fn reach(&self) -> i64 {
        self.start.abs().max(self.end().abs())
    }
}

impl IncrementLaw {
    /// Atomic law from exact `(position, weight)` pairs. Repeated positions
    /// are merged and zero weights dropped.
    pub fn atomic(points: Vec<(BigRational, BigRational)>) -> Result<Self> {
        let mut atoms: Vec<Atom> = Vec::new();
        let mut sorted = points;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (x, w) in sorted {
            if w.is_negative() {
                return Err(Error::InvalidModel(format!("negative increment weight at {x}")));
            }
            if w.is_zero() {
                continue;
            }
            match atoms.last_mut() {
                Some(last) if last.x == x => last.w += w,
                _ => atoms.push(Atom { x, w }),
            }
        }
        let total: f64 = atoms.iter().map(|a| a.w.to_f64()).sum();
        if atoms.is_empty() || (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidModel(format!("increment weights sum to {total}, not 1")));
        }
        let mut acc = 0.0;
        let cdf = atoms.iter().map(|a| { acc += a.w.to_f64(); acc }).collect();
        Ok(Self { kind: Kind::Atomic(atoms), cdf })
    }

    /// Atomic law from `(position, weight)` doubles, taken at their exact binary values.
    pub fn atomic_f64(points: &[(f64, f64)]) -> Result<Self> {
        Self::atomic(
            points
                .iter()
                .map(|&(x, w)| (BigRational::from_f64(x), BigRational::from_f64(w)))
                .collect(),
        )
    }

    /// `¼δ₋₁ + ½δ₀ + ¼δ₁`, the lazy simple random walk.
    pub fn lazy_symmetric() -> Self {
        let r = |n, d| BigRational::from_ratio(n, d);
        Self::atomic(vec![(r(-1, 1), r(1, 4)), (r(0, 1), r(1, 2)), (r(1, 1), r(1, 4))])
            .expect("valid law")
    }

    /// Density sampled at `lo + i h`. Trapezoid mass must be 1.
    pub fn density(lo: f64, h: f64, samples: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || samples.len() < 2 {
            return Err(Error::InvalidModel("density grid needs h > 0 and two samples".into()));
        }
        if samples.iter().any(|q| !(q.is_finite() && *q >= 0.0)) {
            return Err(Error::InvalidModel("density samples must be finite and nonnegative".into()));
        }
        let mut cdf = Vec::with_capacity(samples.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for pair in samples.windows(2) {
            acc += 0.5 * h * (pair[0] + pair[1]);
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidModel(format!("density mass is {acc}, not 1")));
        }
        Ok(Self { kind: Kind::Density { lo, h, samples }, cdf })
    }

    /// `q(x) = (1 + cos(πx/r)) / (2r)` on `[-r, r]`, sampled with spacing `h`.
    pub fn raised_cosine(radius: f64, h: f64) -> Result<Self> {
        let m = (2.0 * radius / h).round() as usize;
        if m < 2 || ((m as f64) * h - 2.0 * radius).abs() > 1e-9 * radius {
            return Err(Error::InvalidModel(format!("h={h} does not divide the support [-{radius}, {radius}]")));
        }
        let samples = (0..=m)
            .map(|i| {
                let x = -radius + i as f64 * h;
                (1.0 + (std::f64::consts::PI * x / radius).cos()) / (2.0 * radius)
            })
            .collect();
        Self::density(-radius, h, samples)
    }

    /// Raised cosine with the default spacing `C_q / 200`.
    pub fn raised_cosine_default(radius: f64) -> Self {
        Self::raised_cosine(radius, radius / 200.0).expect("valid spacing")
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, Kind::Atomic(_))
    }

    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            Kind::Atomic(atoms) => Some(atoms),
            Kind::Density { .. } => None,
        }
    }

    /// Smallest and largest point of the support.
    pub fn support(&self) -> (f64, f64) {
        match &self.kind {
            Kind::Atomic(atoms) => (atoms[0].x.to_f64(), atoms[atoms.len() - 1].x.to_f64()),
            Kind::Density { lo, h, samples } => (*lo, lo + h * (samples.len() - 1) as f64),
        }
    }

    /// `C_q`: the support lies in `[-C_q, C_q]`.
    pub fn support_radius(&self) -> f64 {
        let (lo, hi) = self.support();
        lo.abs().max(hi.abs())
    }

    /// Natural lattice spacing: gcd of atom spacings, or the density grid step.
    pub fn default_h(&self) -> f64 {
        match &self.kind {
            Kind::Atomic(atoms) => {
                let mut h = BigRational::zero();
                for a in atoms {
                    let diff = (&a.x - &atoms[0].x).abs();
                    h = rational_gcd(&h, &diff);
                }
                for a in atoms {
                    h = rational_gcd(&h, &a.x.abs());
                }
                if h.is_zero() { 1.0 } else { h.to_f64() }
            }
            Kind::Density { h, .. } => *h,
        }
    }

    /// The law of `-X`.
    pub fn reflect(&self) -> Self {
        match &self.kind {
            Kind::Atomic(atoms) => {
                Self::atomic(atoms.iter().map(|a| (-a.x.clone(), a.w.clone())).collect()).expect("valid law")
            }
            Kind::Density { lo, h, samples } => {
                let hi = lo + h * (samples.len() - 1) as f64;
                let reversed = samples.iter().rev().cloned().collect();
                Self::density(-hi, *h, reversed).expect("valid law")
            }
        }
    }

    /// The law of `X + a`.
    pub fn shift(&self, a: f64) -> Self {
        match &self.kind {
            Kind::Atomic(atoms) => {
                let a = BigRational::from_f64(a);
                Self::atomic(atoms.iter().map(|p| (&p.x + &a, p.w.clone())).collect()).expect("valid law")
            }
            Kind::Density { lo, h, samples } => Self::density(lo + a, *h, samples.clone()).expect("valid law"),
        }
    }

    /// Convolution kernel on the lattice of spacing `h`. Atoms must sit on
    /// the lattice; a density must be sampled with the same spacing.
    pub fn kernel<S: Scalar>(&self, h: f64) -> Result<Kernel<S>> {
        match &self.kind {
            Kind::Atomic(atoms) => {
                let offsets = atoms
                    .iter()
                    .map(|a| lattice_index(a.x.to_f64(), h))
                    .collect::<Result<Vec<i64>>>()?;
                let start = offsets[0];
                let mut weights = vec![S::zero(); (offsets[offsets.len() - 1] - start + 1) as usize];
                for (a, off) in atoms.iter().zip(&offsets) {
                    let slot = &mut weights[(off - start) as usize];
                    *slot = slot.clone() + S::from_rational(&a.w);
                }
                Ok(Kernel { start, weights })
            }
            Kind::Density { lo, h: qh, samples } => {
                if (qh - h).abs() > 1e-12 * h {
                    return Err(Error::Incommensurate { position: *qh, h });
                }
                let start = lattice_index(*lo, h)?;
                let last = samples.len() - 1;
                let raw: Vec<f64> = samples
                    .iter()
                    .enumerate()
                    .map(|(i, q)| if i == 0 || i == last { 0.5 * h * q } else { h * q })
                    .collect();
                let total: f64 = raw.iter().sum();
                Ok(Kernel { start, weights: raw.iter().map(|w| S::from_f64(w / total)).collect() })
            }
        }
    }

    /// One draw. Densities use inverse-CDF sampling on the quadrature grid
    /// with linear interpolation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match &self.kind {
            Kind::Atomic(atoms) => {
                let i = self.cdf.partition_point(|&c| c <= u).min(atoms.len() - 1);
                atoms[i].x.to_f64()
            }
            Kind::Density { lo, h, .. } => {
                let target = u * self.cdf[self.cdf.len() - 1];
                let i = self.cdf.partition_point(|&c| c <= target).clamp(1, self.cdf.len() - 1);
                let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
                let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
                lo + h * ((i - 1) as f64 + t)
            }
        }
    }

    pub fn to_json(&self) -> Value {
        match &self.kind {
            Kind::Atomic(atoms) => json!({
                "kind": "atomic",
                "atoms": atoms
                    .iter()
                    .map(|a| json!([format_rational(&a.x), format_rational(&a.w)]))
                    .collect::<Vec<_>>(),
            }),
            Kind::Density { lo, h, samples } => json!({"kind": "density", "lo": lo, "h": h, "samples": samples}),
        }
    }

    /// Accepts `{"kind": "atomic", "atoms": [[x, w], ...]}`,
    /// `{"kind": "density", "shape": "raised_cosine", "radius": r, "h": h}` and
    /// `{"kind": "density", "lo": a, "h": h, "samples": [...]}`.
    pub fn from_json(value: &Value) -> Result<Self> {
        let kind = value.get("kind").and_then(Value::as_str).unwrap_or("atomic");
        match kind {
            "atomic" => {
                let atoms = value
                    .get("atoms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Config("atomic increments need an \"atoms\" list".into()))?;
                let points = atoms
                    .iter()
                    .map(|pair| {
                        let pair = pair.as_array().filter(|p| p.len() == 2);
                        let parse = |v: &Value| <BigRational as Scalar>::from_json(v);
                        pair.and_then(|p| Some((parse(&p[0])?, parse(&p[1])?)))
                            .ok_or_else(|| Error::Config("atoms are [position, weight] pairs".into()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::atomic(points)
            }
            "density" => {
                let number = |key: &str| value.get(key).and_then(Value::as_f64);
                if value.get("shape").and_then(Value::as_str) == Some("raised_cosine") {
                    let radius = number("radius").unwrap_or(1.0);
                    let h = number("h").unwrap_or(radius / 200.0);
                    return Self::raised_cosine(radius, h);
                }
                let lo = number("lo").ok_or_else(|| Error::Config("density needs \"lo\"".into()))?;
                let h = number("h").ok_or_else(|| Error::Config("density needs \"h\"".into()))?;
                let samples = value
                    .get("samples")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Config("density needs \"samples\"".into()))?
                    .iter()
                    .map(|v| v.as_f64().ok_or_else(|| Error::Config("density samples must be numbers".into())))
                    .collect::<Result<Vec<f64>>>()?;
                Self::density(lo, h, samples)
            }
            other => Err(Error::Config(format!("unknown increment kind {other:?}"))),
        }
    }
}

fn lattice_index(x: f64, h: f64) -> Result<i64> {
    let k = (x / h).round();
    if (x - k * h).abs() > 1e-9 * h.max(1.0) {
        return Err(Error::Incommensurate { position: x, h });
    }
    Ok(k as i64)
}

fn rational_gcd(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(num, a.denom() * b.denom())
}
