//! Shared test helpers: an exact enumeration oracle for threshold models and
//! a generator of small random cases.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use votewave::increments::IncrementLaw;
use votewave::models::{OffspringLaw, Rule, ThresholdRule, VotingModel};

pub type Law = BTreeMap<BigRational, BigRational>;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// A small threshold model with atomic increments.
#[derive(Clone, Debug)]
pub struct Case {
    pub offspring: Vec<(usize, BigRational)>,
    pub zeta: Vec<((usize, usize), BigRational)>,
    pub atoms: Vec<(BigRational, BigRational)>,
}

impl Case {
    pub fn model(&self) -> VotingModel {
        VotingModel::new(
            OffspringLaw::new(self.offspring.iter().cloned().collect()).unwrap(),
            Rule::Threshold(ThresholdRule::new(self.zeta.iter().cloned().collect())),
        )
        .unwrap()
    }

    pub fn increments(&self) -> IncrementLaw {
        IncrementLaw::atomic(self.atoms.clone()).unwrap()
    }

    /// Law of the root value after `n` generations, by brute force: each
    /// child's value is its own subtree value plus its increment, and a
    /// parent with `d` children picks the `k`-th smallest with weight `ζ_{k,d}`.
    pub fn enumerate(&self, n: usize) -> Law {
        let mut law = Law::from([(BigRational::zero(), BigRational::one())]);
        for _ in 0..n {
            let mut child = Law::new();
            for (m, pm) in &law {
                for (x, px) in &self.atoms {
                    *child.entry(m + x).or_insert_with(BigRational::zero) += pm * px;
                }
            }
            let child: Vec<(BigRational, BigRational)> = child.into_iter().collect();
            let mut next = Law::new();
            for (d, pd) in &self.offspring {
                let mut index = vec![0usize; *d];
                loop {
                    let mut prob = pd.clone();
                    let mut values: Vec<&BigRational> = Vec::with_capacity(*d);
                    for &i in &index {
                        prob *= &child[i].1;
                        values.push(&child[i].0);
                    }
                    values.sort();
                    for ((k, dd), z) in &self.zeta {
                        if dd == d && !z.is_zero() {
                            *next.entry(values[k - 1].clone()).or_insert_with(BigRational::zero) += &prob * z;
                        }
                    }
                    // odometer over all d-tuples of child outcomes
                    let mut pos = 0;
                    while pos < *d {
                        index[pos] += 1;
                        if index[pos] < child.len() {
                            break;
                        }
                        index[pos] = 0;
                        pos += 1;
                    }
                    if pos == *d {
                        break;
                    }
                }
            }
            law = next;
        }
        law
    }
}

/// `P[M <= x]` for every atom `x` of the law.
pub fn cdf_at_atoms(law: &Law) -> Vec<(BigRational, BigRational)> {
    let mut acc = BigRational::zero();
    law.iter()
        .map(|(x, p)| {
            acc += p;
            (x.clone(), acc.clone())
        })
        .collect()
}

fn random_simplex(rng: &mut impl Rng, len: usize, den: i64) -> Vec<BigRational> {
    // random composition of `den` into `len` nonnegative parts
    let mut cuts: Vec<i64> = (0..len - 1).map(|_| rng.gen_range(0..=den)).collect();
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(len);
    let mut last = 0;
    for c in cuts {
        parts.push(c - last);
        last = c;
    }
    parts.push(den - last);
    parts.into_iter().map(|p| rat(p, den)).collect()
}

/// Random threshold model with `d_0 <= 4` and atomic `q` with at most three atoms.
pub fn random_case(seed: u64) -> Case {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let d0 = rng.gen_range(1..=4usize);
    let mut ds: Vec<usize> = (1..d0).filter(|_| rng.gen_bool(0.4)).collect();
    ds.push(d0);
    let probs = random_simplex(&mut rng, ds.len(), 12);
    let offspring: Vec<(usize, BigRational)> = ds.iter().copied().zip(probs).filter(|(_, p)| !p.is_zero()).collect();
    let offspring = if offspring.is_empty() { vec![(d0, BigRational::one())] } else { offspring };
    let mut zeta = Vec::new();
    for (d, _) in &offspring {
        for (k, w) in random_simplex(&mut rng, *d, 8).into_iter().enumerate() {
            if !w.is_zero() {
                zeta.push(((k + 1, *d), w));
            }
        }
    }
    let n_atoms = rng.gen_range(1..=3usize);
    let mut positions: Vec<i64> = Vec::new();
    while positions.len() < n_atoms {
        let x = rng.gen_range(-2..=2i64);
        if !positions.contains(&x) {
            positions.push(x);
        }
    }
    positions.sort_unstable();
    let weights = loop {
        let w = random_simplex(&mut rng, n_atoms, 10);
        if w.iter().all(|p| !p.is_zero()) {
            break w;
        }
    };
    let atoms = positions.into_iter().map(|x| rat(x, 1)).zip(weights).collect();
    Case { offspring, zeta, atoms }
}

/// The fig1a model with the lazy symmetric walk.
pub fn fig1a_case() -> Case {
    Case {
        offspring: vec![(4, rat(1, 1))],
        zeta: vec![((2, 4), rat(1, 2)), ((3, 4), rat(1, 2))],
        atoms: vec![(rat(-1, 1), rat(1, 4)), (rat(0, 1), rat(1, 2)), (rat(1, 1), rat(1, 4))],
    }
}
