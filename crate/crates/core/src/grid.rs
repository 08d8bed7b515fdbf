//! Deterministic iteration of `F_{n+1} = g(q * F_n)` on a lattice.

use rayon::prelude::*;

use crate::bernstein::BernsteinPoly;
use crate::error::{Error, Result};
use crate::increments::{IncrementLaw, Kernel};
use crate::mc::EmpiricalCdf;
use crate::models::{Nonlinearity, VotingModel};
use crate::scalar::Scalar;

/// Values below this (or above `1 - TAIL_EPS`) are clamped to the tails.
pub const TAIL_EPS: f64 = 1e-14;
/// Minimum mass for conditioning on an interval.
pub const MASS_EPS: f64 = 1e-9;

const PAR_THRESHOLD: usize = 1 << 14;

/// CDF sampled at `x_i = (start + i) h`, equal to 0 left of the first
/// point and to 1 right of the last.
#[derive(Clone, Debug, PartialEq)]
pub struct GridCdf<S = f64> {
    start: i64,
    h: f64,
    values: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialCondition {
    /// `𝟙(x >= 0)`, value 1 at the origin.
    Step,
    /// Value 1/2 at the origin; symmetric about it.
    MidpointStep,
}

impl<S: Scalar> GridCdf<S> {
    pub fn new(start: i64, h: f64, values: Vec<S>) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidModel(format!("grid spacing must be positive, got {h}")));
        }
        let tol = S::from_f64(1e-12);
        let (zero, one) = (S::zero(), S::one());
        let mut prev = zero.clone();
        for v in &values {
            if *v < zero.clone() - tol.clone() || *v > one.clone() + tol.clone() || *v < prev.clone() - tol.clone() {
                return Err(Error::InvalidModel("grid values must be nondecreasing in [0,1]".into()));
            }
            prev = v.clone();
        }
        Ok(Self { start, h, values })
    }

    /// Builds without validation (for super/sub-solutions and intermediate states).
    pub fn from_raw(start: i64, h: f64, values: Vec<S>) -> Self {
        Self { start, h, values }
    }

    pub fn initial(h: f64, kind: InitialCondition) -> Self {
        let v = match kind {
            InitialCondition::Step => S::one(),
            InitialCondition::MidpointStep => S::from_ratio(1, 2),
        };
        Self { start: 0, h, values: vec![v] }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Index of the last stored point.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, index: i64) -> f64 {
        index as f64 * self.h
    }

    /// `(x_i, F(x_i))` over the stored points.
    pub fn points(&self) -> impl Iterator<Item = (f64, &S)> + '_ {
        self.values.iter().enumerate().map(|(i, v)| (self.x(self.start + i as i64), v))
    }

    /// Value at lattice index `index`, tails included.
    pub fn at(&self, index: i64) -> S {
        if index < self.start {
            S::zero()
        } else if index > self.end() {
            S::one()
        } else {
            self.values[(index - self.start) as usize].clone()
        }
    }

    /// Value at a lattice position; `x` must sit on the lattice.
    pub fn at_position(&self, x: f64) -> S {
        self.at((x / self.h).round() as i64)
    }

    pub fn to_f64(&self) -> GridCdf<f64> {
        GridCdf { start: self.start, h: self.h, values: self.values.iter().map(Scalar::to_f64).collect() }
    }

    /// Sets values within `eps` of 0 or 1 to the tail value and drops
    /// leading zeros and trailing ones beyond `margin` points.
    pub fn clamp_and_trim(&mut self, eps: f64, margin: usize) {
        let (lo, hi) = (S::from_f64(eps), S::one() - S::from_f64(eps));
        for v in &mut self.values {
            if *v < lo {
                *v = S::zero();
            } else if *v > hi {
                *v = S::one();
            }
        }
        let first = self.values.iter().position(|v| !v.is_zero()).unwrap_or(self.values.len());
        let last = self.values.iter().rposition(|v| !v.is_one()).map_or(0, |i| i + 1);
        if first >= last {
            // a pure step: keep the first point that reaches 1
            let at = first.min(self.values.len() - 1);
            self.start += at as i64;
            self.values = vec![self.values[at].clone()];
            return;
        }
        let keep_lo = first.saturating_sub(margin);
        let keep_hi = (last + margin).min(self.values.len());
        self.start += keep_lo as i64;
        self.values = self.values[keep_lo..keep_hi].to_vec();
    }
}

impl GridCdf<f64> {
    /// Piecewise-linear view: interpolates between lattice points, and from
    /// 0 at `x_start - h` and to 1 at `x_end + h`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x / self.h;
        let i = t.floor();
        let frac = t - i;
        let i = i as i64;
        let (a, b) = (self.at(i), self.at(i + 1));
        a + frac * (b - a)
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// `a`-quantile: smallest `x` with `F(x) >= a`, linearly interpolated
    /// between the bracketing lattice points. The implicit tails are not
    /// interpolated into, so a jump at the first point is located there.
    pub fn quantile(&self, a: f64) -> Result<f64> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidProbability(a));
        }
        let i = self.values.partition_point(|&v| v < a);
        if i == self.values.len() {
            return Ok(self.x(self.end() + 1));
        }
        let (xi, vi) = (self.x(self.start + i as i64), self.values[i]);
        if i == 0 || vi == a {
            return Ok(xi);
        }
        let prev = self.values[i - 1];
        Ok(xi - self.h + self.h * (a - prev) / (vi - prev))
    }

    /// Support edges: the first point with positive mass and the first point reaching 1.
    pub fn support_edges(&self) -> (f64, f64) {
        let first = self.values.iter().position(|&v| v > 0.0).unwrap_or(0);
        let last = self.values.iter().position(|&v| v >= 1.0).unwrap_or(self.values.len());
        (self.x(self.start + first as i64), self.x(self.start + last as i64))
    }

    /// Law conditioned on `[a, b]` (infinite ends allowed), on the lattice
    /// points inside the interval.
    pub fn conditional(&self, a: f64, b: f64) -> Result<GridCdf<f64>> {
        let fa = if a.is_finite() { self.eval(a) } else if a < 0.0 { 0.0 } else { 1.0 };
        let fb = if b.is_finite() { self.eval(b) } else if b < 0.0 { 0.0 } else { 1.0 };
        let mass = fb - fa;
        if !(mass >= MASS_EPS) {
            return Err(Error::NullConditioning { mass });
        }
        let lo = if a.is_finite() { ((a / self.h).ceil() as i64).max(self.start) } else { self.start };
        let hi = if b.is_finite() { ((b / self.h).floor() as i64).min(self.end()) } else { self.end() };
        let values: Vec<f64> = (lo..=hi).map(|i| ((self.at(i) - fa) / mass).clamp(0.0, 1.0)).collect();
        if values.is_empty() {
            return Err(Error::NullConditioning { mass: 0.0 });
        }
        Ok(GridCdf { start: lo, h: self.h, values })
    }

    /// Median of `|M|`: smallest lattice `x >= 0` with `F(x) - F(-x - h) >= 1/2`.
    pub fn median_abs(&self) -> f64 {
        let mut i = 0i64;
        loop {
            if self.at(i) - self.at(-i - 1) >= 0.5 {
                return self.x(i);
            }
            i += 1;
        }
    }

    /// `sup |F - E|` over the lattice points and the sample points.
    pub fn kolmogorov_distance(&self, e: &EmpiricalCdf) -> f64 {
        let on_grid = (self.start - 1..=self.end() + 1)
            .map(|i| (self.at(i) - e.eval(self.x(i))).abs())
            .fold(0.0, f64::max);
        let on_samples = e.samples().iter().map(|&x| (self.eval(x) - e.eval(x)).abs()).fold(0.0, f64::max);
        on_grid.max(on_samples)
    }

    /// Rows `x,F` for CSV output.
    pub fn to_rows(&self) -> Vec<(f64, f64)> {
        self.points().map(|(x, v)| (x, *v)).collect()
    }
}

/// `q * F` on the lattice of `F`, widened by the kernel reach.
pub fn convolve_kernel<S: Scalar>(f: &GridCdf<S>, kernel: &Kernel<S>) -> GridCdf<S> {
    let start = f.start + kernel.start;
    let end = f.end() + kernel.end();
    // outputs whose whole window lies in the exact 0 (or 1) part of the input are copied
    let first_live = f.start + f.values.iter().position(|v| !v.is_zero()).unwrap_or(f.values.len()) as i64;
    let last_live = f.start + f.values.iter().rposition(|v| !v.is_one()).map_or(-1, |i| i as i64);
    let point = |i: i64| {
        if i - kernel.start < first_live {
            return S::zero();
        }
        if i - kernel.end() > last_live {
            return S::one();
        }
        kernel
            .weights
            .iter()
            .enumerate()
            .fold(S::zero(), |acc, (j, w)| acc + w.clone() * f.at(i - kernel.start - j as i64))
    };
    let values: Vec<S> = if ((end - start + 1) as usize) * kernel.weights.len() > PAR_THRESHOLD {
        (start..=end).into_par_iter().map(point).collect()
    } else {
        (start..=end).map(point).collect()
    };
    GridCdf { start, h: f.h, values }
}

/// `q * F`; atoms must lie on the lattice of `F`.
pub fn convolve<S: Scalar>(f: &GridCdf<S>, q: &IncrementLaw) -> Result<GridCdf<S>> {
    Ok(convolve_kernel(f, &q.kernel(f.h)?))
}

/// `F_{n+1} = g(q * F_n)` with a fixed lattice, kernel and polynomial.
#[derive(Clone, Debug)]
pub struct GridRecursion<S = f64> {
    g: BernsteinPoly<S>,
    kernel: Kernel<S>,
    h: f64,
    c_q: f64,
    initial: InitialCondition,
}

impl<S: Scalar> GridRecursion<S> {
    /// Threshold models iterate with `q`, outcome models with the reflected law.
    /// The lattice is the natural one of `q`.
    pub fn new(model: &VotingModel, q: &IncrementLaw) -> Result<Self> {
        Self::with_h(model, q, q.default_h())
    }

    pub fn with_h(model: &VotingModel, q: &IncrementLaw, h: f64) -> Result<Self> {
        let law = if model.is_threshold() { q.clone() } else { q.reflect() };
        Self::from_parts(model.recursion_polynomial()?, &law, h)
    }

    /// Uses `q` as given. The initial condition is the step for atomic laws
    /// and the midpoint step for densities.
    pub fn from_parts(g: BernsteinPoly<S>, q: &IncrementLaw, h: f64) -> Result<Self> {
        let initial = if q.is_atomic() { InitialCondition::Step } else { InitialCondition::MidpointStep };
        Ok(Self { g, kernel: q.kernel(h)?, h, c_q: q.support_radius(), initial })
    }

    pub fn with_initial(mut self, initial: InitialCondition) -> Self {
        self.initial = initial;
        self
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn g(&self) -> &BernsteinPoly<S> {
        &self.g
    }

    pub fn kernel(&self) -> &Kernel<S> {
        &self.kernel
    }

    pub fn initial(&self) -> GridCdf<S> {
        GridCdf::initial(self.h, self.initial)
    }

    pub fn convolve(&self, f: &GridCdf<S>) -> GridCdf<S> {
        convolve_kernel(f, &self.kernel)
    }

    /// One application of `g(q * ·)` without clamping.
    pub fn step(&self, f: &GridCdf<S>) -> GridCdf<S> {
        let mut c = self.convolve(f);
        let apply = |v: &mut S| *v = self.g.eval(v);
        if c.values.len() * self.g.degree() > PAR_THRESHOLD {
            c.values.par_iter_mut().for_each(apply);
        } else {
            c.values.iter_mut().for_each(apply);
        }
        c
    }

    /// [`step`](Self::step) followed by tail clamping and trimming to a `2 C_q` margin.
    /// Exact scalars are only trimmed.
    pub fn advance(&self, f: &GridCdf<S>) -> GridCdf<S> {
        let mut next = self.step(f);
        let margin = (2.0 * self.c_q / self.h).ceil() as usize;
        next.clamp_and_trim(if S::EXACT { 0.0 } else { TAIL_EPS }, margin);
        next
    }

    /// `F_0, F_1, ...` starting from `f0`.
    pub fn iter_from(&self, f0: GridCdf<S>) -> Iterate<'_, S> {
        Iterate { recursion: self, next: Some(f0) }
    }

    /// `F_0, F_1, ...` from the default initial condition.
    pub fn iter(&self) -> Iterate<'_, S> {
        self.iter_from(self.initial())
    }

    /// `F_n` from the default initial condition.
    pub fn run(&self, n: usize) -> GridCdf<S> {
        self.iter().nth(n).expect("unbounded iterator")
    }
}

pub struct Iterate<'a, S> {
    recursion: &'a GridRecursion<S>,
    next: Option<GridCdf<S>>,
}

impl<S: Scalar> Iterator for Iterate<'_, S> {
    type Item = GridCdf<S>;

    fn next(&mut self) -> Option<GridCdf<S>> {
        let current = self.next.take()?;
        self.next = Some(self.recursion.advance(&current));
        Some(current)
    }
}

/// One cluster at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterRow {
    pub n: usize,
    pub s: usize,
    pub interval: (f64, f64),
    pub median: f64,
    /// `(eps, 1 - eps)` conditional quantile gap.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterSummary {
    pub s: usize,
    /// Least-squares slope of `median - q_n` per generation over the last half of the series.
    pub drift_slope: f64,
    /// `|drift_slope| < h/10`.
    pub bounded: bool,
    /// Gap variation over the last half of the series within 10% of the last gap.
    pub tight: bool,
    /// `median - q_n` at the last recorded time.
    pub last_offset: f64,
}

/// Cluster diagnostics. The flags describe the computed series; they are
/// not proofs of tightness.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterReport {
    /// Reference level: the interior zero of `f` closest to 1/2 (or 1/2).
    pub level: f64,
    /// `(n, q_n)`: the reference-level quantile over time.
    pub reference: Vec<(usize, f64)>,
    pub rows: Vec<ClusterRow>,
    pub clusters: Vec<ClusterSummary>,
}

impl ClusterReport {
    pub fn rows_for(&self, s: usize) -> impl Iterator<Item = &ClusterRow> {
        self.rows.iter().filter(move |r| r.s == s)
    }

    /// `median - q_n` for cluster `s` at time `n`.
    pub fn offset(&self, s: usize, n: usize) -> Option<f64> {
        let row = self.rows.iter().find(|r| r.s == s && r.n == n)?;
        let q = self.reference.iter().find(|(m, _)| *m == n)?.1;
        Some(row.median - q)
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 { 0.0 } else { sxy / sxx }
}

/// Intervals between the quantiles at the zeros of `f`, with conditional
/// medians and gaps, for each `(n, F_n)` of the series.
pub fn cluster_report(series: &[(usize, GridCdf<f64>)], nl: &Nonlinearity, eps: f64) -> Result<ClusterReport> {
    let interior = &nl.zeros[1..nl.zeros.len() - 1];
    let level = interior
        .iter()
        .copied()
        .min_by(|a, b| (a - 0.5).abs().total_cmp(&(b - 0.5).abs()))
        .unwrap_or(0.5);
    let mut reference = Vec::new();
    let mut rows = Vec::new();
    for (n, f) in series {
        let (lo, hi) = f.support_edges();
        let mut edges = vec![lo];
        for &z in interior {
            edges.push(f.quantile(z)?);
        }
        edges.push(hi);
        reference.push((*n, f.quantile(level)?));
        for s in 1..edges.len() {
            let (a, b) = (edges[s - 1], edges[s]);
            let cond = f.conditional(a, b)?;
            rows.push(ClusterRow {
                n: *n,
                s,
                interval: (a, b),
                median: cond.quantile(0.5)?,
                gap: cond.quantile(1.0 - eps)? - cond.quantile(eps)?,
            });
        }
    }
    let h = series.first().map_or(1.0, |(_, f)| f.h());
    let clusters = (1..nl.zeros.len())
        .map(|s| {
            let mine: Vec<&ClusterRow> = rows.iter().filter(|r| r.s == s).collect();
            let half = mine.len() / 2;
            let tail = &mine[half.min(mine.len().saturating_sub(2))..];
            let xs: Vec<f64> = tail.iter().map(|r| r.n as f64).collect();
            let offsets: Vec<f64> = tail
                .iter()
                .map(|r| r.median - reference.iter().find(|(m, _)| *m == r.n).expect("same n").1)
                .collect();
            let drift_slope = ls_slope(&xs, &offsets);
            let gaps: Vec<f64> = tail.iter().map(|r| r.gap).collect();
            let last_gap = *gaps.last().unwrap_or(&0.0);
            let spread = gaps.iter().fold(f64::NEG_INFINITY, |m, g| m.max(*g))
                - gaps.iter().fold(f64::INFINITY, |m, g| m.min(*g));
            ClusterSummary {
                s,
                drift_slope,
                bounded: drift_slope.abs() < h / 10.0,
                tight: spread <= 0.1 * last_gap.max(h),
                last_offset: *offsets.last().unwrap_or(&0.0),
            }
        })
        .collect();
    Ok(ClusterReport { level, reference, rows, clusters })
}
