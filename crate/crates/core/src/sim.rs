//! Seeded Monte Carlo simulation of a strategy against the stochastic model.
//!
//! Run `i` uses ChaCha8 seeded from the 64-bit seed with stream `i`, so
//! results do not depend on the number of worker threads. Successors are
//! drawn exactly: each row is scaled to a common denominator and an integer
//! is drawn uniformly below it.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{MarkovChain, Measure, StateId};
use crate::rational::Rational;

pub const PRNG_NAME: &str = "chacha8 (rand_chacha 0.9), one stream per run";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("at least one run is required")]
    NoRuns,
    #[error("transition probabilities of chain node {0} need a denominator above 2^128")]
    DenominatorTooLarge(usize),
}

/// Integer sampler for one chain row.
#[derive(Clone, Debug)]
struct RowSampler {
    total: u128,
    /// (cumulative upper bound, target, weight)
    cumulative: Vec<(u128, usize, i64)>,
}

/// Chain prepared for sampling.
#[derive(Clone, Debug)]
pub struct Sampler {
    rows: Vec<RowSampler>,
    initial: usize,
    is_target: Vec<bool>,
}

impl Sampler {
    /// `targets` are game states; chain nodes over them end a
    /// shortest-path run.
    pub fn new(mc: &MarkovChain, targets: &BTreeSet<StateId>) -> Result<Self, SimError> {
        let mut rows = Vec::with_capacity(mc.num_states());
        for (u, row) in mc.rows.iter().enumerate() {
            let lcm = row.iter().fold(BigInt::from(1), |acc, t| acc.lcm(t.prob.denom()));
            let total = lcm.to_u128().ok_or(SimError::DenominatorTooLarge(u))?;
            let mut acc = 0u128;
            let mut cumulative = Vec::with_capacity(row.len());
            for t in row {
                let share = (t.prob.numer() * (&lcm / t.prob.denom())).to_u128().ok_or(SimError::DenominatorTooLarge(u))?;
                if share == 0 {
                    continue;
                }
                acc += share;
                cumulative.push((acc, t.target, t.weight));
            }
            rows.push(RowSampler { total, cumulative });
        }
        let is_target = mc.labels.iter().map(|(_, s)| targets.contains(s)).collect();
        Ok(Sampler { rows, initial: mc.initial, is_target })
    }

    fn step(&self, u: usize, rng: &mut ChaCha8Rng) -> (usize, i64) {
        let row = &self.rows[u];
        let x = rng.random_range(0..row.total);
        let i = row.cumulative.partition_point(|(c, _, _)| *c <= x);
        let (_, v, w) = row.cumulative[i];
        (v, w)
    }

    /// Node sequence of `steps` transitions from the initial node.
    pub fn path(&self, steps: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let mut u = self.initial;
        let mut out = Vec::with_capacity(steps + 1);
        out.push(u);
        for _ in 0..steps {
            u = self.step(u, rng).0;
            out.push(u);
        }
        out
    }

    /// One run: (total weight, steps taken, reached target).
    fn run(&self, measure: Measure, horizon: usize, rng: &mut ChaCha8Rng) -> (i128, bool) {
        let mut u = self.initial;
        let mut total = 0i128;
        for _ in 0..horizon {
            if measure == Measure::ShortestPath && self.is_target[u] {
                return (total, true);
            }
            let (v, w) = self.step(u, rng);
            total += w as i128;
            u = v;
        }
        let done = measure == Measure::MeanPayoff || self.is_target[u];
        (total, done)
    }
}

/// Random generator for run `index` under `seed`.
pub fn run_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Empirical summary. For shortest path, values are run costs; for
/// mean-payoff, the average weight over the horizon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimSummary {
    pub runs: u64,
    /// Shortest-path runs that hit the horizon before the target.
    pub censored: u64,
    pub mean: Rational,
    pub variance: Rational,
    /// Extremes over completed runs.
    pub min: Option<Rational>,
    pub max: Option<Rational>,
    /// Run count per value, values floored to integers.
    pub histogram: BTreeMap<i64, u64>,
    /// Censored runs contribute their partial cost, so the mean is only a
    /// lower bound.
    pub mean_is_lower_bound: bool,
    pub prng: &'static str,
}

impl SimSummary {
    pub fn std_error(&self) -> f64 {
        let v = self.variance.to_f64().unwrap_or(f64::NAN);
        (v / self.runs as f64).sqrt()
    }
}

/// Simulates `runs` independent runs of the chain for up to `horizon`
/// steps each.
pub fn simulate(
    mc: &MarkovChain,
    measure: Measure,
    targets: &BTreeSet<StateId>,
    runs: u64,
    horizon: usize,
    seed: u64,
) -> Result<SimSummary, SimError> {
    if runs == 0 {
        return Err(SimError::NoRuns);
    }
    let sampler = Sampler::new(mc, targets)?;
    let outcomes: Vec<(i128, bool)> = (0..runs)
        .into_par_iter()
        .map(|i| sampler.run(measure, horizon, &mut run_rng(seed, i)))
        .collect();
    let scale = match measure {
        Measure::MeanPayoff => horizon.max(1) as i128,
        Measure::ShortestPath => 1,
    };
    let mut sum = BigInt::zero();
    let mut sum_sq = BigInt::zero();
    let mut censored = 0;
    let mut min: Option<i128> = None;
    let mut max: Option<i128> = None;
    let mut histogram = BTreeMap::new();
    for &(total, done) in &outcomes {
        sum += total;
        sum_sq += BigInt::from(total) * total;
        if !done {
            censored += 1;
            continue;
        }
        min = Some(min.map_or(total, |m| m.min(total)));
        max = Some(max.map_or(total, |m| m.max(total)));
        *histogram.entry(total.div_euclid(scale) as i64).or_insert(0) += 1;
    }
    let n = BigInt::from(runs);
    let s = BigInt::from(scale);
    let mean = Rational::new(sum.clone(), &n * &s);
    let variance = if runs > 1 {
        // (sum_sq - sum^2 / n) / (n - 1), scaled
        Rational::new(&sum_sq * &n - &sum * &sum, &n * (&n - 1) * &s * &s)
    } else {
        Rational::zero()
    };
    let to_value = |x: i128| Rational::new(x.into(), s.clone());
    Ok(SimSummary {
        runs,
        censored,
        mean,
        variance,
        min: min.map(to_value),
        max: max.map(to_value),
        histogram,
        mean_is_lower_bound: censored > 0,
        prng: PRNG_NAME,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChainTransition;
    use crate::rational::{int, ratio};

    fn ct(target: usize, prob: Rational, weight: i64) -> ChainTransition {
        ChainTransition { target, prob, weight }
    }

    #[test]
    fn deterministic_chain_has_zero_variance() {
        let mc = MarkovChain::from_rows(vec![vec![ct(1, int(1), 3)], vec![ct(0, int(1), 5)]], 0);
        let s = simulate(&mc, Measure::MeanPayoff, &BTreeSet::new(), 50, 10, 7).unwrap();
        assert_eq!(s.mean, int(4));
        assert_eq!(s.variance, int(0));
        assert_eq!(s.censored, 0);
    }

    #[test]
    fn reproducible_and_censored() {
        // 0 -> 0 (1/2, w 1) | 1 (1/2, w 1); 1 absorbing target
        let mc = MarkovChain::from_rows(
            vec![vec![ct(0, ratio(1, 2), 1), ct(1, ratio(1, 2), 1)], vec![ct(1, int(1), 0)]],
            0,
        );
        let t = BTreeSet::from([1]);
        let a = simulate(&mc, Measure::ShortestPath, &t, 2000, 100, 42).unwrap();
        let b = simulate(&mc, Measure::ShortestPath, &t, 2000, 100, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.censored, 0);
        let mean = a.mean.to_f64().unwrap();
        assert!((mean - 2.0).abs() < 3.0 * a.std_error(), "{mean}");
        let c = simulate(&mc, Measure::ShortestPath, &t, 2000, 1, 42).unwrap();
        assert!(c.censored > 0 && c.mean_is_lower_bound);
    }
}
