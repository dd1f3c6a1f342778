//! Sampling estimate of common-good expected utilities under a mixed profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::access::{AccessStructure, Coalition};
use crate::error::{Error, Result};
use crate::game::{outcome_v, utility_v, CommonGoodUtilities, StrategyProfile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub means: Vec<f64>,
    /// Sample standard deviation over `sqrt(samples)`.
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

/// Running moments for one participant, mergeable across shards.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        Moments {
            count,
            mean: self.mean + delta * other.count as f64 / count as f64,
            m2: self.m2
                + other.m2
                + delta * delta * (self.count as f64 * other.count as f64) / count as f64,
        }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2.max(0.0) / (self.count - 1) as f64).sqrt() / (self.count as f64).sqrt()
    }
}

fn run_shard(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
    samples: u64,
    seed: u64,
) -> Vec<Moments> {
    let n = gamma.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = vec![Moments::default(); n];
    for _ in 0..samples {
        let revealers = (1..=n).fold(Coalition::EMPTY, |s, i| {
            if rng.gen_bool(alpha.get(i)) {
                s.with(i)
            } else {
                s
            }
        });
        let info = outcome_v(gamma, revealers);
        for (i, m) in (1..=n).zip(acc.iter_mut()) {
            m.push(utility_v(&info, u, i));
        }
    }
    acc
}

/// Simulates on a single shard.
pub fn simulate(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
    samples: u64,
    seed: u64,
) -> Result<SimResult> {
    simulate_sharded(gamma, u, alpha, samples, seed, 1)
}

/// Splits the samples over `shards` independent streams seeded `seed + shard`.
/// The estimate is deterministic for a fixed shard count.
pub fn simulate_sharded(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
    samples: u64,
    seed: u64,
    shards: u64,
) -> Result<SimResult> {
    if samples == 0 {
        return Err(Error::EmptyInput("samples must be >= 1"));
    }
    if shards == 0 {
        return Err(Error::EmptyInput("shards must be >= 1"));
    }
    for got in [u.n(), alpha.n()] {
        if got != gamma.n() {
            return Err(Error::LengthMismatch {
                expected: gamma.n(),
                got,
            });
        }
    }
    let per = samples / shards;
    let extra = samples % shards;
    let parts: Vec<Vec<Moments>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let count = per + u64::from(shard < extra);
            run_shard(gamma, u, alpha, count, seed.wrapping_add(shard))
        })
        .collect();
    let merged = parts
        .into_iter()
        .fold(vec![Moments::default(); gamma.n()], |acc, part| {
            acc.into_iter().zip(part).map(|(a, b)| a.merge(b)).collect()
        });
    Ok(SimResult {
        means: merged.iter().map(|m| m.mean).collect(),
        stderr: merged.iter().map(Moments::stderr).collect(),
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::expected_utility;

    fn t32() -> AccessStructure {
        AccessStructure::threshold(3, 2).unwrap()
    }

    #[test]
    fn half_profile_matches_exact_value() {
        let u = CommonGoodUtilities::uniform(3, 4.0, 1.0).unwrap();
        let alpha = StrategyProfile::uniform(3, 0.5).unwrap();
        let r = simulate(&t32(), &u, &alpha, 100_000, 11).unwrap();
        let exact = expected_utility(&t32(), &u, &alpha, 3, 0.5).unwrap();
        assert!((exact - 1.5).abs() < 1e-12);
        assert!((r.means[2] - exact).abs() <= 3.0 * r.stderr[2]);
    }

    #[test]
    fn degenerate_profiles_have_zero_spread() {
        let u = CommonGoodUtilities::uniform(3, 4.0, 1.0).unwrap();
        let r = simulate(
            &t32(),
            &u,
            &StrategyProfile::uniform(3, 0.0).unwrap(),
            1000,
            1,
        )
        .unwrap();
        assert_eq!(r.means, vec![0.0; 3]);
        assert_eq!(r.stderr, vec![0.0; 3]);
        let r = simulate(
            &t32(),
            &u,
            &StrategyProfile::uniform(3, 1.0).unwrap(),
            1000,
            1,
        )
        .unwrap();
        assert_eq!(r.means, vec![3.0; 3]);
        assert_eq!(r.stderr, vec![0.0; 3]);
    }

    #[test]
    fn deterministic_and_shard_stable() {
        let u = CommonGoodUtilities::new(vec![4.0, 2.0, 0.5], 1.0).unwrap();
        let alpha = StrategyProfile::new(vec![0.3, 0.6, 0.9]).unwrap();
        let a = simulate_sharded(&t32(), &u, &alpha, 10_001, 5, 4).unwrap();
        let b = simulate_sharded(&t32(), &u, &alpha, 10_001, 5, 4).unwrap();
        assert_eq!(a, b);
        let single = simulate(&t32(), &u, &alpha, 10_001, 5).unwrap();
        for i in 0..3 {
            assert!(
                (a.means[i] - single.means[i]).abs()
                    < 6.0 * (a.stderr[i] + single.stderr[i]) + 1e-12
            );
        }
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..50).map(|v| (v as f64 * 0.37).sin()).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..17].iter().for_each(|&x| a.push(x));
        xs[17..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let u = CommonGoodUtilities::uniform(3, 4.0, 1.0).unwrap();
        let alpha = StrategyProfile::uniform(3, 0.5).unwrap();
        assert!(simulate(&t32(), &u, &alpha, 0, 1).is_err());
        let short = StrategyProfile::uniform(2, 0.5).unwrap();
        assert!(matches!(
            simulate(&t32(), &u, &short, 10, 1),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 2
            })
        ));
    }
}
