//! Bistable traveling waves `φ = g((q * φ)(· + ℓ))`, their verification,
//! and the super/sub-solution sandwich around them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{convolve_kernel, GridCdf, GridRecursion, TAIL_EPS};
use crate::increments::{IncrementLaw, Kernel};
use crate::models::Nonlinearity;
use crate::rng::NodeKey;
use rand::Rng;

/// Half-width of the wave domain in units of `C_q`.
pub const DOMAIN_RADII: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct WaveOptions {
    pub tol: f64,
    pub max_iters: usize,
    /// Width of the initial ramp `(1 + tanh(x / width)) / 2`.
    pub ramp_width: f64,
    pub pin_level: f64,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 20_000, ramp_width: 1.0, pin_level: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct WaveProfile {
    /// The profile on `[-L, L]`, 0 and 1 beyond.
    pub phi: GridCdf<f64>,
    pub speed: f64,
    pub residual: f64,
    pub pin_level: f64,
    pub iterations: usize,
    /// `L`.
    pub half_width: f64,
}

impl WaveProfile {
    pub fn h(&self) -> f64 {
        self.phi.h()
    }

    /// Consecutive differences are positive wherever `φ ∈ [band, 1 - band]`.
    pub fn is_strictly_increasing(&self, band: f64) -> bool {
        self.phi
            .values()
            .windows(2)
            .all(|w| !(w[0] >= band && w[1] <= 1.0 - band) || w[1] > w[0])
    }

    /// Distances from the pin to where `φ` drops below `eps` (left) and
    /// rises above `1 - eps` (right).
    pub fn tail_widths(&self, eps: f64) -> (f64, f64) {
        let left = self.phi.points().filter(|(_, v)| **v < eps).map(|(x, _)| x).fold(f64::NEG_INFINITY, f64::max);
        let right = self.phi.points().filter(|(_, v)| **v > 1.0 - eps).map(|(x, _)| x).fold(f64::INFINITY, f64::min);
        (-left, right)
    }
}

/// The wave-frame operator `u ↦ g(I_s(q * u))`, where `I_s` evaluates the
/// piecewise-linear interpolant at `x + s`.
struct Operator<'a> {
    nl: &'a Nonlinearity,
    kernel: Kernel<f64>,
    h: f64,
    /// Lattice index range `[-n, n]`.
    n: i64,
}

impl<'a> Operator<'a> {
    fn new(nl: &'a Nonlinearity, q: &IncrementLaw) -> Result<Self> {
        if q.is_atomic() {
            return Err(Error::InvalidModel("the wave solver needs a density increment law".into()));
        }
        let h = q.default_h();
        let n = (DOMAIN_RADII * q.support_radius() / h).round() as i64;
        Ok(Self { nl, kernel: q.kernel(h)?, h, n })
    }

    fn grid(&self, values: Vec<f64>) -> GridCdf<f64> {
        GridCdf::from_raw(-self.n, self.h, values)
    }

    fn convolve(&self, u: &GridCdf<f64>) -> GridCdf<f64> {
        convolve_kernel(u, &self.kernel)
    }

    /// `g` (extended linearly outside `[0,1]`) of `c` at `x_i + s` on the domain, plus `offset`.
    fn apply(&self, c: &GridCdf<f64>, s: f64, offset: f64) -> Vec<f64> {
        let shift = s / self.h;
        (-self.n..=self.n)
            .into_par_iter()
            .map(|i| self.nl.extend_g(interp(c, i as f64 + shift) + offset))
            .collect()
    }

    /// Position where the interpolant of `c` reaches `level`.
    fn locate(&self, c: &GridCdf<f64>, level: f64) -> f64 {
        let j = c.values().partition_point(|&v| v < level);
        let idx = c.start() + j as i64;
        let (lo, hi) = (c.at(idx - 1), c.at(idx));
        let frac = if hi > lo { (level - lo) / (hi - lo) } else { 1.0 };
        (idx as f64 - 1.0 + frac) * self.h
    }
}

/// Linear interpolation at fractional lattice index `t`, tails included.
fn interp(c: &GridCdf<f64>, t: f64) -> f64 {
    let k = t.floor();
    let frac = t - k;
    let k = k as i64;
    let (a, b) = (c.at(k), c.at(k + 1));
    a + frac * (b - a)
}

/// Front-tracking iteration for the traveling wave of a bistable nonlinearity.
pub fn solve_wave(nl: &Nonlinearity, q: &IncrementLaw, options: &WaveOptions) -> Result<WaveProfile> {
    if !nl.bistable {
        return Err(Error::NotBistable);
    }
    let op = Operator::new(nl, q)?;
    let pin_c = nl.g_inverse(options.pin_level);
    let mut u = op.grid(
        (-op.n..=op.n)
            .map(|i| 0.5 * (1.0 + (i as f64 * op.h / options.ramp_width).tanh()))
            .collect(),
    );
    let mut shifts: Vec<f64> = Vec::new();
    let mut change = f64::INFINITY;
    for iter in 1..=options.max_iters {
        let c = op.convolve(&u);
        let s = op.locate(&c, pin_c);
        let next = op.grid(op.apply(&c, s, 0.0));
        change = next.values().iter().zip(u.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        u = next;
        shifts.push(s);
        let window = &shifts[shifts.len() - (shifts.len() / 4).max(1)..];
        let mean = window.iter().sum::<f64>() / window.len() as f64;
        let var = window.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / window.len() as f64;
        if iter >= 8 && change < options.tol / 100.0 && var < options.tol * options.tol {
            let mut wave = WaveProfile {
                phi: u,
                speed: mean,
                residual: 0.0,
                pin_level: options.pin_level,
                iterations: iter,
                half_width: op.n as f64 * op.h,
            };
            wave.residual = residual(&wave, nl, q)?;
            return Ok(wave);
        }
    }
    Err(Error::NonConvergence { iterations: options.max_iters, residual: change })
}

/// `sup_i |φ_i - g((q * φ)(x_i + ℓ))|`, with the shifted convolution
/// evaluated by linear interpolation.
pub fn residual(wave: &WaveProfile, nl: &Nonlinearity, q: &IncrementLaw) -> Result<f64> {
    let op = Operator::new(nl, q)?;
    let phi = op.grid(resample(&wave.phi, op.n));
    let image = op.apply(&op.convolve(&phi), wave.speed, 0.0);
    Ok(phi.values().iter().zip(&image).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Values of `f` on `[-n, n]`.
fn resample(f: &GridCdf<f64>, n: i64) -> Vec<f64> {
    (-n..=n).map(|i| f.at(i)).collect()
}

/// `ℓ` strictly inside the support of `q`, with a margin of one grid step.
pub fn check_speed_bound(wave: &WaveProfile, q: &IncrementLaw) -> bool {
    let (lo, hi) = q.support();
    wave.speed > lo + wave.h() && wave.speed < hi - wave.h()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupersolutionParams {
    pub beta0: f64,
    pub delta0: f64,
    pub k: f64,
    pub r0: f64,
    pub xi0_plus: f64,
    pub xi0_minus: f64,
}

impl SupersolutionParams {
    pub fn beta(&self, n: usize) -> f64 {
        self.beta0 * (-self.delta0 * n as f64).exp()
    }

    /// `ξ_n⁺ = ξ_0⁺ + K β_0 (1 - e^{-r_0 n})`.
    pub fn xi_plus(&self, n: usize) -> f64 {
        self.xi0_plus + self.k * self.beta0 * (1.0 - (-self.r0 * n as f64).exp())
    }

    pub fn xi_minus(&self, n: usize) -> f64 {
        self.xi0_minus + self.k * self.beta0 * (1.0 - (-self.r0 * n as f64).exp())
    }
}

/// The sandwich in the moving frame `y = x - nℓ`: upper `φ(y + ξ_n⁺) + β_n`,
/// lower `φ(y - ξ_n⁻) - β_n`.
struct Sandwich<'a> {
    op: Operator<'a>,
    phi: GridCdf<f64>,
    c: GridCdf<f64>,
    speed: f64,
}

impl<'a> Sandwich<'a> {
    fn new(wave: &WaveProfile, nl: &'a Nonlinearity, q: &IncrementLaw) -> Result<Self> {
        let op = Operator::new(nl, q)?;
        let phi = op.grid(resample(&wave.phi, op.n));
        let c = op.convolve(&phi);
        Ok(Self { op, phi, c, speed: wave.speed })
    }

    fn phi_at(&self, i: i64, shift: f64) -> f64 {
        interp(&self.phi, i as f64 + shift / self.op.h)
    }

    fn upper(&self, p: &SupersolutionParams, n: usize) -> Vec<f64> {
        (-self.op.n..=self.op.n).map(|i| self.phi_at(i, p.xi_plus(n)) + p.beta(n)).collect()
    }

    fn lower(&self, p: &SupersolutionParams, n: usize) -> Vec<f64> {
        (-self.op.n..=self.op.n).map(|i| self.phi_at(i, -p.xi_minus(n)) - p.beta(n)).collect()
    }

    /// `min_i [w̄_{n+1} - g(q * w̄_n)]` (sign = 1) or `max_i [w̲_{n+1} - g(q * w̲_n)]` (sign = -1).
    fn defect(&self, p: &SupersolutionParams, n: usize, sign: f64) -> f64 {
        let (xi_now, xi_next) = if sign > 0.0 {
            (p.xi_plus(n), p.xi_plus(n + 1))
        } else {
            (-p.xi_minus(n), -p.xi_minus(n + 1))
        };
        let image = self.op.apply(&self.c, self.speed + xi_now, sign * p.beta(n));
        let next = (-self.op.n..=self.op.n).map(|i| self.phi_at(i, xi_next) + sign * p.beta(n + 1));
        let diffs = next.zip(image).map(|(a, b)| a - b);
        if sign > 0.0 {
            diffs.fold(f64::INFINITY, f64::min)
        } else {
            diffs.fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// `min` over `n < horizon` and the grid of `w̄_{n+1} - g(q * w̄_n)`;
/// nonnegative for a supersolution.
pub fn verify_supersolution(
    wave: &WaveProfile,
    params: &SupersolutionParams,
    nl: &Nonlinearity,
    q: &IncrementLaw,
    horizon: usize,
) -> Result<f64> {
    let sandwich = Sandwich::new(wave, nl, q)?;
    Ok((0..horizon).map(|n| sandwich.defect(params, n, 1.0)).fold(f64::INFINITY, f64::min))
}

/// `max` over `n < horizon` and the grid of `w̲_{n+1} - g(q * w̲_n)`;
/// nonpositive for a subsolution.
pub fn verify_subsolution(
    wave: &WaveProfile,
    params: &SupersolutionParams,
    nl: &Nonlinearity,
    q: &IncrementLaw,
    horizon: usize,
) -> Result<f64> {
    let sandwich = Sandwich::new(wave, nl, q)?;
    Ok((0..horizon).map(|n| sandwich.defect(params, n, -1.0)).fold(f64::NEG_INFINITY, f64::max))
}

/// Search lattice for `(β_0, δ_0, K)`, with `r_0 = δ_0`.
pub const BETA0_GRID: [f64; 3] = [1e-3, 1e-2, 1e-1];
pub const DELTA0_GRID: [f64; 3] = [0.01, 0.05, 0.1];
pub const K_GRID: [f64; 3] = [1.0, 5.0, 25.0];

#[derive(Clone, Copy, Debug)]
pub struct SandwichSearch {
    pub params: SupersolutionParams,
    pub super_defect: f64,
    pub sub_defect: f64,
}

/// Tries the search lattice and returns the parameters whose worse side
/// (super or sub) has the largest margin.
pub fn search_supersolution(
    wave: &WaveProfile,
    nl: &Nonlinearity,
    q: &IncrementLaw,
    horizon: usize,
    xi0: f64,
) -> Result<SandwichSearch> {
    let sandwich = Sandwich::new(wave, nl, q)?;
    let mut candidates = Vec::new();
    for &beta0 in &BETA0_GRID {
        for &delta0 in &DELTA0_GRID {
            for &k in &K_GRID {
                candidates.push(SupersolutionParams { beta0, delta0, k, r0: delta0, xi0_plus: xi0, xi0_minus: xi0 });
            }
        }
    }
    let scored: Vec<SandwichSearch> = candidates
        .into_iter()
        .map(|params| {
            let super_defect = (0..horizon).map(|n| sandwich.defect(&params, n, 1.0)).fold(f64::INFINITY, f64::min);
            let sub_defect = (0..horizon).map(|n| sandwich.defect(&params, n, -1.0)).fold(f64::NEG_INFINITY, f64::max);
            SandwichSearch { params, super_defect, sub_defect }
        })
        .collect();
    Ok(scored
        .into_iter()
        .max_by(|a, b| a.super_defect.min(-a.sub_defect).total_cmp(&b.super_defect.min(-b.sub_defect)))
        .expect("nonempty lattice"))
}

/// Outcome of iterating one initial condition inside the sandwich.
#[derive(Clone, Copy, Debug)]
pub struct TrappingRun {
    /// `min_{n,i} (w̄_n - F_n)`; nonnegative when trapped from above.
    pub upper_margin: f64,
    /// `min_{n,i} (F_n - w̲_n)`; nonnegative when trapped from below.
    pub lower_margin: f64,
}

impl TrappingRun {
    pub fn trapped(&self, tol: f64) -> bool {
        self.upper_margin >= -tol && self.lower_margin >= -tol
    }
}

/// Random initial conditions between the shifted profiles, iterated in
/// the moving frame for `horizon` steps and compared with the sandwich.
pub fn trapping_check(
    wave: &WaveProfile,
    params: &SupersolutionParams,
    nl: &Nonlinearity,
    q: &IncrementLaw,
    horizon: usize,
    runs: usize,
    seed: u64,
) -> Result<Vec<TrappingRun>> {
    let sandwich = Sandwich::new(wave, nl, q)?;
    let op = &sandwich.op;
    (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = NodeKey::root(seed, r).stream();
            let mut f: Vec<f64> = (-op.n..=op.n)
                .map(|i| {
                    let theta = rng.gen_range(-params.xi0_minus..=params.xi0_plus);
                    let noise = rng.gen_range(-params.beta0..=params.beta0);
                    (sandwich.phi_at(i, theta) + noise).clamp(0.0, 1.0)
                })
                .collect();
            let mut run = TrappingRun { upper_margin: f64::INFINITY, lower_margin: f64::INFINITY };
            for n in 0..=horizon {
                let (up, lo) = (sandwich.upper(params, n), sandwich.lower(params, n));
                for i in 0..f.len() {
                    run.upper_margin = run.upper_margin.min(up[i] - f[i]);
                    run.lower_margin = run.lower_margin.min(f[i] - lo[i]);
                }
                if n < horizon {
                    let c = op.convolve(&op.grid(f));
                    f = op.apply(&c, sandwich.speed, 0.0);
                    for v in &mut f {
                        if *v < TAIL_EPS {
                            *v = 0.0;
                        } else if *v > 1.0 - TAIL_EPS {
                            *v = 1.0;
                        }
                    }
                }
            }
            Ok(run)
        })
        .collect()
}

/// One row of the convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub median: f64,
    /// `sup_x |F_n(x) - φ(x - nℓ - x̂_0)|`.
    pub sup_dist: f64,
}

#[derive(Clone, Debug)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    /// `x̂_0 = med_{n_max} - n_max ℓ`.
    pub x0: f64,
}

/// Runs the lattice recursion from the default initial condition and
/// compares medians and profiles with the wave.
pub fn convergence_study(nl: &Nonlinearity, q: &IncrementLaw, wave: &WaveProfile, n_max: usize) -> Result<ConvergenceStudy> {
    let rec = GridRecursion::<f64>::from_parts(nl.g.clone(), q, q.default_h())?;
    let series: Vec<GridCdf<f64>> = rec.iter().take(n_max + 1).collect();
    let medians = series.iter().map(|f| f.quantile(0.5)).collect::<Result<Vec<f64>>>()?;
    let x0 = medians[n_max] - n_max as f64 * wave.speed;
    let rows = series
        .par_iter()
        .zip(&medians)
        .enumerate()
        .map(|(n, (f, &median))| {
            let shift = n as f64 * wave.speed + x0;
            let lo = f.start().min(((shift - wave.half_width) / f.h()).floor() as i64);
            let hi = f.end().max(((shift + wave.half_width) / f.h()).ceil() as i64);
            let sup_dist = (lo..=hi)
                .map(|i| (f.at(i) - wave.phi.eval(f.x(i) - shift)).abs())
                .fold(0.0, f64::max);
            ConvergenceRow { n, median, sup_dist }
        })
        .collect();
    Ok(ConvergenceStudy { rows, x0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{analyze, presets::*};
    use crate::scalar::Scalar;
    use num_rational::BigRational;

    fn setup(model: crate::models::VotingModel) -> (Nonlinearity, IncrementLaw) {
        let nl = analyze(&model.recursion_polynomial().unwrap()).unwrap();
        // a coarse grid keeps the unit tests quick
        (nl, IncrementLaw::raised_cosine(1.0, 0.02).unwrap())
    }

    #[test]
    fn symmetric_wave_does_not_move() {
        let (nl, q) = setup(ternary_median());
        let w = solve_wave(&nl, &q, &WaveOptions::default()).unwrap();
        assert!(w.speed.abs() < 1e-8);
        assert!(w.residual < 1e-8);
        assert!((w.phi.at(0) - 0.5).abs() < 1e-12);
        assert!(w.is_strictly_increasing(1e-6));
        assert!(check_speed_bound(&w, &q));
    }

    #[test]
    fn asymmetric_wave_moves_inside_the_support() {
        let (nl, q) = setup(binary_ternary(BigRational::from_ratio(1, 4)));
        let w = solve_wave(&nl, &q, &WaveOptions::default()).unwrap();
        assert!(w.speed.abs() > 1e-3 && w.speed.abs() < 1.0);
        assert!(w.residual < 1e-8);
    }

    #[test]
    fn non_bistable_is_rejected() {
        let (nl, q) = setup(fig1a());
        let kpp = analyze(&crate::bernstein::BernsteinPoly::new(vec![0.0, 0.7, 1.0]).unwrap()).unwrap();
        assert!(matches!(solve_wave(&kpp, &q, &WaveOptions::default()), Err(Error::NotBistable)));
        let atomic = IncrementLaw::lazy_symmetric();
        assert!(solve_wave(&nl, &atomic, &WaveOptions::default()).is_err());
    }

    #[test]
    fn speed_bound_is_strict() {
        let (nl, q) = setup(ternary_median());
        let mut w = solve_wave(&nl, &q, &WaveOptions::default()).unwrap();
        w.speed = 1.0;
        assert!(!check_speed_bound(&w, &q));
    }

    #[test]
    fn residual_of_non_waves() {
        let (nl, q) = setup(binary_ternary(BigRational::from_ratio(1, 4)));
        let w = solve_wave(&nl, &q, &WaveOptions::default()).unwrap();
        let n = (w.phi.len() / 2) as i64;
        let step = WaveProfile { phi: GridCdf::from_raw(-n, w.h(), (-n..=n).map(|i| if i >= 0 { 1.0 } else { 0.0 }).collect()), ..w.clone() };
        assert!(residual(&step, &nl, &q).unwrap() > 0.1);
        // the unstable constant is a fixed point away from the Dirichlet edges
        let theta = nl.theta().unwrap();
        let flat = GridCdf::from_raw(-n, w.h(), vec![theta; w.phi.len()]);
        let op = Operator::new(&nl, &q).unwrap();
        let image = op.apply(&op.convolve(&flat), 0.0, 0.0);
        let interior = &image[image.len() / 4..3 * image.len() / 4];
        assert!(interior.iter().all(|v| (v - theta).abs() < 1e-12));
    }

    #[test]
    fn zero_amplitude_sandwich_is_the_wave() {
        let (nl, q) = setup(ternary_median());
        let w = solve_wave(&nl, &q, &WaveOptions::default()).unwrap();
        let p = SupersolutionParams { beta0: 0.0, delta0: 0.1, k: 1.0, r0: 0.1, xi0_plus: 0.0, xi0_minus: 0.0 };
        assert!(verify_supersolution(&w, &p, &nl, &q, 5).unwrap() >= -w.residual - 1e-15);
        assert!(verify_subsolution(&w, &p, &nl, &q, 5).unwrap() <= w.residual + 1e-15);
    }
}
