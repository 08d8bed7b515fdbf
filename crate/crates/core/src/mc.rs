//! Monte Carlo simulation of voting on branching random walks.
//!
//! Trees are never stored: each replica is a depth-first recursion where a
//! node's randomness comes from its path key (see [`crate::rng`]). A node
//! draws, in order, its increment, its offspring count, then its threshold
//! or vote. Two runs of different depth therefore share every draw on the
//! common part of the tree.

use num_rational::BigRational;
use rand::Rng;
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;

use crate::bernstein::{rescale_nonlinearity, BernsteinPoly};
use crate::error::{Error, Result};
use crate::increments::IncrementLaw;
use crate::models::{analyze_exact, Rule, VotingModel};
use crate::rng::NodeKey;
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub model: VotingModel,
    pub increments: IncrementLaw,
    /// Number of generations `n`.
    pub depth: usize,
    pub replicas: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(model: VotingModel, increments: IncrementLaw, depth: usize, replicas: usize, seed: u64) -> Self {
        Self { model, increments, depth, replicas: replicas.max(1), seed }
    }

    pub fn with_depth(&self, depth: usize) -> Self {
        Self { depth, ..self.clone() }
    }
}

/// Sorted sample of a real random variable.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        Self { samples }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s <= x) as f64 / self.len() as f64
    }

    /// Fraction of samples `< x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.samples.partition_point(|&s| s < x) as f64 / self.len() as f64
    }

    /// Smallest sample `x` with `eval(x) >= a`.
    pub fn quantile(&self, a: f64) -> f64 {
        let n = self.len();
        let idx = ((a * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[idx]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn min(&self) -> f64 {
        self.samples[0]
    }

    pub fn max(&self) -> f64 {
        self.samples[self.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        mean_and_se(&self.samples).0
    }

    /// The law of `-X`.
    pub fn negated(&self) -> Self {
        Self { samples: self.samples.iter().rev().map(|x| -x).collect() }
    }
}

/// Dvoretzky–Kiefer–Wolfowitz radius: `sup|F_n - F| <= ε` with probability `1 - alpha`.
pub fn dkw_bound(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_two_sample(a: &EmpiricalCdf, b: &EmpiricalCdf) -> f64 {
    a.samples
        .iter()
        .chain(&b.samples)
        .map(|&x| (a.eval(x) - b.eval(x)).abs().max((a.eval_left(x) - b.eval_left(x)).abs()))
        .fold(0.0, f64::max)
}

/// Sample mean and its standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Cumulative tables for the per-node draws.
struct Sampler<'a> {
    offspring: Vec<(usize, f64)>,
    /// `rule[d]`: cumulative `ζ_{·,d}` (threshold) or `α_{·,d}` (outcome).
    rule: Vec<Vec<f64>>,
    q: &'a IncrementLaw,
}

impl<'a> Sampler<'a> {
    fn new(model: &VotingModel, q: &'a IncrementLaw) -> Self {
        let mut acc = 0.0;
        let offspring = model.offspring.iter_f64().map(|(d, p)| { acc += p; (d, acc) }).collect();
        let d_max = model.d_max();
        let rule = (0..=d_max)
            .map(|d| match &model.rule {
                Rule::Threshold(r) => {
                    let mut acc = 0.0;
                    (1..=d).map(|k| { acc += r.zeta_f64(k, d); acc }).collect()
                }
                Rule::Outcome(r) => (0..=d).map(|k| r.alpha_f64(k, d)).collect(),
            })
            .collect();
        Self { offspring, rule, q }
    }

    fn offspring(&self, rng: &mut SplitMix64) -> usize {
        let u: f64 = rng.gen();
        let i = self.offspring.partition_point(|&(_, c)| c <= u).min(self.offspring.len() - 1);
        self.offspring[i].0
    }

    /// `L_v` in `1..=d`.
    fn threshold(&self, rng: &mut SplitMix64, d: usize) -> usize {
        let u: f64 = rng.gen();
        let row = &self.rule[d];
        row.partition_point(|&c| c <= u).min(d - 1) + 1
    }

    fn vote(&self, rng: &mut SplitMix64, k: usize, d: usize) -> bool {
        rng.gen::<f64>() < self.rule[d][k]
    }

    /// Draws the increment (non-root nodes) and returns the node position and stream.
    fn enter(&self, key: NodeKey, parent: f64, is_root: bool) -> (f64, SplitMix64) {
        let mut rng = key.stream();
        let pos = if is_root { parent } else { parent + self.q.sample(&mut rng) };
        (pos, rng)
    }

    fn threshold_node(&self, key: NodeKey, parent: f64, remaining: usize, is_root: bool, scratch: &mut Vec<f64>) -> f64 {
        let (pos, mut rng) = self.enter(key, parent, is_root);
        if remaining == 0 {
            return pos;
        }
        let d = self.offspring(&mut rng);
        let l = self.threshold(&mut rng, d);
        let base = scratch.len();
        for i in 0..d {
            let v = self.threshold_node(key.child(i), pos, remaining - 1, false, scratch);
            scratch.push(v);
        }
        // stable: ties keep child order
        scratch[base..].sort_by(f64::total_cmp);
        let value = scratch[base + l - 1];
        scratch.truncate(base);
        value
    }

    fn vote_node(&self, key: NodeKey, parent: f64, remaining: usize, is_root: bool) -> bool {
        let (pos, mut rng) = self.enter(key, parent, is_root);
        if remaining == 0 {
            return pos >= 0.0;
        }
        let d = self.offspring(&mut rng);
        let ones = (0..d).filter(|&i| self.vote_node(key.child(i), pos, remaining - 1, false)).count();
        self.vote(&mut rng, ones, d)
    }

    fn minmax_node(&self, key: NodeKey, parent: f64, remaining: usize, is_root: bool) -> Result<[f64; 3]> {
        let (pos, mut rng) = self.enter(key, parent, is_root);
        if remaining == 0 {
            return Ok([pos; 3]);
        }
        let d = self.offspring(&mut rng);
        if !(d == 2 || d == 3) {
            return Err(Error::UnsupportedOffspring(d));
        }
        let l = self.threshold(&mut rng, d);
        let mut kids = [[0.0; 3]; 3];
        for (i, kid) in kids.iter_mut().take(d).enumerate() {
            *kid = self.minmax_node(key.child(i), pos, remaining - 1, false)?;
        }
        let column = |j: usize| {
            let mut c: Vec<f64> = kids[..d].iter().map(|k| k[j]).collect();
            c.sort_by(f64::total_cmp);
            c
        };
        let (m, lo, hi) = (column(0), column(1), column(2));
        // min over pairs of the max is the 2nd smallest; max over pairs of the min is the 2nd largest
        Ok([m[l - 1], lo[1], hi[d - 2]])
    }
}

fn require_threshold(model: &VotingModel) -> Result<()> {
    if model.is_threshold() {
        Ok(())
    } else {
        Err(Error::InvalidModel("expected a threshold model".into()))
    }
}

/// `M_n` for each replica, in replica order.
pub fn sample_threshold(config: &SimConfig) -> Result<Vec<f64>> {
    require_threshold(&config.model)?;
    let sampler = Sampler::new(&config.model, &config.increments);
    let capacity = config.depth * config.model.d_max();
    Ok((0..config.replicas as u64)
        .into_par_iter()
        .map_init(
            || Vec::with_capacity(capacity),
            |scratch, r| sampler.threshold_node(NodeKey::root(config.seed, r), 0.0, config.depth, true, scratch),
        )
        .collect())
}

/// Empirical law of `M_n` under a threshold model.
pub fn simulate_threshold(config: &SimConfig) -> Result<EmpiricalCdf> {
    Ok(EmpiricalCdf::from_samples(sample_threshold(config)?))
}

/// Frequency of root votes equal to 1 for the walk started at `x`;
/// an estimate of `u_n(x)`.
pub fn simulate_outcome_vote(config: &SimConfig, x: f64) -> Result<f64> {
    if config.model.is_threshold() {
        return Err(Error::InvalidModel("expected an outcome model".into()));
    }
    let sampler = Sampler::new(&config.model, &config.increments);
    let ones = (0..config.replicas as u64)
        .into_par_iter()
        .filter(|&r| sampler.vote_node(NodeKey::root(config.seed, r), x, config.depth, true))
        .count();
    Ok(ones as f64 / config.replicas as f64)
}

/// Per replica, `(M_n, M̃_n, M̂_n)` on one realized tree: the threshold
/// value, the smallest maximum and the largest minimum over binary subtrees.
pub fn minmax_binary(config: &SimConfig) -> Result<Vec<[f64; 3]>> {
    require_threshold(&config.model)?;
    if let Some((d, _)) = config.model.offspring.support().find(|(d, _)| !(*d == 2 || *d == 3)) {
        return Err(Error::UnsupportedOffspring(d));
    }
    let sampler = Sampler::new(&config.model, &config.increments);
    (0..config.replicas as u64)
        .into_par_iter()
        .map(|r| sampler.minmax_node(NodeKey::root(config.seed, r), 0.0, config.depth, true))
        .collect()
}

/// `max_r |M_{n+1} - M_n|` over replicas, both computed on the same tree.
pub fn coupled_step_bound(config: &SimConfig) -> Result<f64> {
    let now = sample_threshold(config)?;
    let next = sample_threshold(&config.with_depth(config.depth + 1))?;
    Ok(now.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug)]
pub struct OrderStatCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub se_lhs: f64,
    pub se_rhs: f64,
}

impl OrderStatCheck {
    pub fn combined_se(&self) -> f64 {
        self.se_lhs.hypot(self.se_rhs)
    }

    pub fn agrees(&self, sigmas: f64) -> bool {
        (self.lhs - self.rhs).abs() <= sigmas * self.combined_se()
    }
}

/// Estimates both sides of
/// `E[X_(k)^(d)] = k/(d+1) E[X_(k+1)^(d+1)] + (d+1-k)/(d+1) E[X_(k)^(d+1)]`
/// from independent samples.
pub fn order_stat_identity_check(
    d: usize,
    k: usize,
    law: &IncrementLaw,
    replicas: usize,
    seed: u64,
) -> Result<OrderStatCheck> {
    if k == 0 || k > d {
        return Err(Error::IndexOutOfRange { k, d });
    }
    let (a, b) = (k as f64 / (d + 1) as f64, (d + 1 - k) as f64 / (d + 1) as f64);
    let draws = |tag: u64, size: usize| -> Vec<Vec<f64>> {
        (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = NodeKey::root(seed, r).aux(tag).stream();
                let mut xs: Vec<f64> = (0..size).map(|_| law.sample(&mut rng)).collect();
                xs.sort_by(f64::total_cmp);
                xs
            })
            .collect()
    };
    let lhs: Vec<f64> = draws(0, d).iter().map(|xs| xs[k - 1]).collect();
    let rhs: Vec<f64> = draws(1, d + 1).iter().map(|xs| a * xs[k] + b * xs[k - 1]).collect();
    let (lhs, se_lhs) = mean_and_se(&lhs);
    let (rhs, se_rhs) = mean_and_se(&rhs);
    Ok(OrderStatCheck { lhs, rhs, se_lhs, se_rhs })
}

#[derive(Clone, Debug)]
pub struct ClusteringEstimate {
    /// `I_{s,n} = [q_{s-1,n}, q_{s,n}]`.
    pub interval: (f64, f64),
    /// Estimate of `E[ψ(M_{n+1}) - ψ(M_n)]`.
    pub psi_drift: f64,
    /// Estimate of `Σ_k β_{k,D}(f̃_s) E[M_(k+1) - M_(k)]` over conditional `D`-tuples.
    pub sigma: f64,
    pub se_psi: f64,
    pub se_sigma: f64,
    pub c_q: f64,
}

impl ClusteringEstimate {
    pub fn difference(&self) -> f64 {
        self.psi_drift - self.sigma
    }

    pub fn combined_se(&self) -> f64 {
        self.se_psi.hypot(self.se_sigma)
    }

    /// `|difference| <= C_q + 4σ`.
    pub fn holds(&self) -> bool {
        self.difference().abs() <= self.c_q + 4.0 * self.combined_se()
    }
}

/// Monte Carlo estimate of both sides of the clustering inequality for the
/// cluster between the zeros `α_{s-1}` and `α_s` of `f`, with `D`-tuples.
pub fn clustering_bound_estimate(config: &SimConfig, s: usize, big_d: usize) -> Result<ClusteringEstimate> {
    require_threshold(&config.model)?;
    let g = config.model.recursion_polynomial::<BigRational>()?;
    let nl = analyze_exact(&g)?;
    let last = nl.zeros.len() - 1;
    if s == 0 || s > last {
        return Err(Error::IndexOutOfRange { k: s, d: last });
    }
    let big_d = big_d.max(config.model.d_max()).max(g.degree());

    let now = sample_threshold(config)?;
    let next = sample_threshold(&config.with_depth(config.depth + 1))?;
    let ecdf = EmpiricalCdf::from_samples(now.clone());
    let edge = |i: usize| match i {
        0 => ecdf.min(),
        i if i == last => ecdf.max(),
        i => ecdf.quantile(nl.zeros[i]),
    };
    let (lo, hi) = (edge(s - 1), edge(s));
    let psi = |x: f64| {
        if x <= lo {
            hi - lo
        } else if x <= hi {
            hi - x
        } else {
            0.0
        }
    };
    let drift: Vec<f64> = now.iter().zip(&next).map(|(a, b)| psi(*b) - psi(*a)).collect();
    let (psi_drift, se_psi) = mean_and_se(&drift);

    let pool: Vec<f64> = now.iter().copied().filter(|x| (lo..=hi).contains(x)).collect();
    if pool.len() < 100 * big_d {
        return Err(Error::InsufficientConditioning { have: pool.len(), need: 100 * big_d });
    }
    let f = g.sub(&BernsteinPoly::identity(g.degree()));
    let (a1, a2) = (BigRational::from_f64(nl.zeros[s - 1]), BigRational::from_f64(nl.zeros[s]));
    let beta = rescale_nonlinearity(&f, &a1, &a2)?.elevate_to(big_d)?.to_f64();
    let sums: Vec<f64> = pool
        .chunks_exact(big_d)
        .map(|tuple| {
            let mut t = tuple.to_vec();
            t.sort_by(f64::total_cmp);
            (1..big_d).map(|k| beta.coeffs()[k] * (t[k] - t[k - 1])).sum()
        })
        .collect();
    let (sigma, se_sigma) = mean_and_se(&sums);
    Ok(ClusteringEstimate {
        interval: (lo, hi),
        psi_drift,
        sigma,
        se_psi,
        se_sigma,
        c_q: config.increments.support_radius(),
    })
}
