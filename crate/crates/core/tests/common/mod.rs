//! Brute-force oracles shared by the integration tests. They work from raw
//! generator masks and never call the library's analysis code.

#![allow(dead_code)]

use rand::Rng;

pub const EPS: f64 = 1e-9;

/// An access structure given by generating coalitions (bit i-1 = participant i).
#[derive(Debug, Clone)]
pub struct Oracle {
    pub n: usize,
    pub generators: Vec<u32>,
}

impl Oracle {
    pub fn threshold(n: usize, k: usize) -> Self {
        let generators = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        Self { n, generators }
    }

    pub fn authorized(&self, s: u32) -> bool {
        self.generators.iter().any(|&g| g & !s == 0)
    }

    pub fn minimal(&self) -> Vec<u32> {
        (1u32..1 << self.n)
            .filter(|&s| {
                self.authorized(s)
                    && (0..self.n).all(|j| s & (1 << j) == 0 || !self.authorized(s & !(1 << j)))
            })
            .collect()
    }

    /// Common-good payoff of participant `i` (0-based) when `s` discloses.
    pub fn payoff(&self, s: u32, values: &[f64], cost: f64, i: usize) -> f64 {
        let gain = if self.authorized(s) { values[i] } else { 0.0 };
        let paid = if s & (1 << i) != 0 { cost } else { 0.0 };
        gain - paid
    }

    pub fn pure_ne(&self, values: &[f64], cost: f64) -> Vec<u32> {
        (0u32..1 << self.n)
            .filter(|&s| {
                (0..self.n).all(|i| {
                    self.payoff(s ^ (1 << i), values, cost, i)
                        <= self.payoff(s, values, cost, i) + EPS
                })
            })
            .collect()
    }

    /// Minimal coalitions whose members all value the good above the cost,
    /// plus the empty profile unless a self-sufficient member would act alone.
    pub fn predicted_ne(&self, values: &[f64], cost: f64) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .minimal()
            .into_iter()
            .filter(|&x| (0..self.n).all(|i| x & (1 << i) == 0 || values[i] > cost))
            .collect();
        let lone_actor = (0..self.n).any(|i| self.authorized(1 << i) && values[i] > cost);
        if !lone_actor {
            out.push(0);
        }
        out.sort_unstable();
        out
    }

    /// Exact expected payoff of participant `i` when everyone discloses
    /// independently with the given probabilities.
    pub fn expected(&self, alpha: &[f64], values: &[f64], cost: f64, i: usize) -> f64 {
        (0u32..1 << self.n)
            .map(|s| {
                let w: f64 = (0..self.n)
                    .map(|j| {
                        if s & (1 << j) != 0 {
                            alpha[j]
                        } else {
                            1.0 - alpha[j]
                        }
                    })
                    .product();
                w * self.payoff(s, values, cost, i)
            })
            .sum()
    }

    /// Probability that participant `i` turns an unauthorized set of others into an authorized one.
    pub fn pivotal(&self, alpha: &[f64], i: usize) -> f64 {
        (0u32..1 << self.n)
            .filter(|s| s & (1 << i) == 0)
            .filter(|&s| !self.authorized(s) && self.authorized(s | 1 << i))
            .map(|s| {
                (0..self.n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        if s & (1 << j) != 0 {
                            alpha[j]
                        } else {
                            1.0 - alpha[j]
                        }
                    })
                    .product::<f64>()
            })
            .sum()
    }
}

pub fn random_oracle<R: Rng>(rng: &mut R, max_n: usize) -> Oracle {
    let n = rng.gen_range(1..=max_n);
    let count = rng.gen_range(1..=4);
    let generators = (0..count).map(|_| rng.gen_range(1..1u32 << n)).collect();
    Oracle { n, generators }
}

pub fn members(mask: u32) -> Vec<usize> {
    (0..32)
        .filter(|j| mask & (1 << j) != 0)
        .map(|j| j + 1)
        .collect()
}

pub fn indicator(mask: u32, n: usize) -> Vec<u8> {
    (0..n).map(|j| ((mask >> j) & 1) as u8).collect()
}

/// Payoff in the broadcast game: everyone learns at `k` disclosures, only the
/// abstainers learn at `k - 1`, nobody otherwise.
pub fn broadcast_payoff(n: usize, k: usize, reward: f64, penalty: f64, s: u32, i: usize) -> f64 {
    let r = s.count_ones() as usize;
    let learned: u32 = if r >= k {
        (1u32 << n) - 1
    } else if r + 1 == k {
        !s & ((1u32 << n) - 1)
    } else {
        0
    };
    let t = |j: usize| f64::from((learned >> j) & 1);
    reward * t(i) - penalty * (0..n).filter(|&j| j != i).map(t).sum::<f64>()
}

/// Interpolates at zero over GF(p) with plain integer arithmetic.
pub fn lagrange_at_zero(points: &[(u64, u64)], p: u64) -> u64 {
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    let mut secret = 0;
    for (a, &(xa, ya)) in points.iter().enumerate() {
        let (mut num, mut den) = (1u64, 1u64);
        for (b, &(xb, _)) in points.iter().enumerate() {
            if a != b {
                num = num * xb % p;
                den = den * ((xb + p - xa) % p) % p;
            }
        }
        secret = (secret + ya * num % p * pow(den, p - 2)) % p;
    }
    secret
}
