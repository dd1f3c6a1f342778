//! Verification sweeps behind `ratshare verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::access::{AccessStructure, Coalition};
use crate::async_game::{verify_theorem2, AsyncGame};
use crate::equilibrium::{verify_ht_theorem, verify_theorem3};
use crate::error::Result;
use crate::field::PrimeField;
use crate::game::{
    expected_utility, f_gamma, g_gamma, outcome_v, pivot_probabilities, utility_v,
    CommonGoodUtilities, GreedyUtilities, StrategyProfile,
};
use crate::shamir::{deal, perfectness_audit, reconstruct};

pub const SUITES: [&str; 5] = ["shamir", "lemma1", "theorem3", "ht", "async"];

/// Largest `--max-n` accepted.
pub const MAX_N_LIMIT: usize = 8;

const CHECK_TOL: f64 = 1e-12;
const VALUE_GRID: [f64; 3] = [0.5, 2.0, 5.0];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub max_n: Option<usize>,
    pub seed: u64,
}

impl VerifyOptions {
    fn cap(&self, default: usize) -> usize {
        self.max_n.map_or(default, |m| m.min(default))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub lines: Vec<String>,
    pub checks: usize,
    pub failures: usize,
}

impl SuiteOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            lines: Vec::new(),
            checks: 0,
            failures: 0,
        }
    }

    fn record(&mut self, ok: bool, line: String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
        }
        self.lines.push(format!(
            "{} {} {}",
            if ok { "ok  " } else { "FAIL" },
            self.name,
            line
        ));
    }

    fn error(&mut self, line: String, err: crate::Error) {
        self.record(false, format!("{line}: error: {err}"));
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub fn run_suite(name: &str, opts: &VerifyOptions) -> Option<SuiteOutcome> {
    Some(match name {
        "shamir" => shamir_suite(opts),
        "lemma1" => lemma1_suite(opts),
        "theorem3" => theorem3_suite(opts),
        "ht" => ht_suite(opts),
        "async" => async_suite(opts),
        _ => return None,
    })
}

/// All `k`-element subsets of `0..n`, in lexicographic order.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            rec(i + 1, n, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn shamir_suite(opts: &VerifyOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("shamir");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_n = opts.cap(4);
    for p in [5u64, 7, 11] {
        let field = PrimeField::new(p).expect("prime");
        for n in 1..=max_n {
            for k in 1..=n {
                let label = format!("p={p} k={k} n={n}");
                let mut check = || -> Result<(bool, bool)> {
                    let mut round_trip = true;
                    for secret in field.elements() {
                        let dealing = deal(secret, k, n, &mut rng)?;
                        for subset in k_subsets(n, k) {
                            let shares: Vec<_> =
                                subset.iter().map(|&j| dealing.shares[j]).collect();
                            round_trip &= reconstruct(&shares, p)? == secret;
                        }
                    }
                    Ok((round_trip, perfectness_audit(p, k, n)?.pass))
                };
                match check() {
                    Ok((rt, perfect)) => out.record(
                        rt && perfect,
                        format!("{label} round_trip={rt} perfect={perfect}"),
                    ),
                    Err(e) => out.error(label, e),
                }
            }
        }
    }
    out
}

/// Expected utility by summing over every pure realization of the others.
fn expected_utility_by_enumeration(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
    i: usize,
    x: f64,
) -> f64 {
    let n = gamma.n();
    let mut total = 0.0;
    for mask in 0u32..1 << n {
        let s = Coalition::from_mask(mask);
        let weight: f64 = (1..=n)
            .map(|j| {
                let a = if j == i { x } else { alpha.get(j) };
                if s.contains(j) {
                    a
                } else {
                    1.0 - a
                }
            })
            .product();
        total += weight * utility_v(&outcome_v(gamma, s), u, i);
    }
    total
}

pub fn random_general_structure<R: Rng>(rng: &mut R, max_n: usize) -> AccessStructure {
    let n = rng.gen_range(1..=max_n);
    let count = rng.gen_range(1..=4);
    let coalitions: Vec<Coalition> = (0..count)
        .map(|_| Coalition::from_mask(rng.gen_range(1..1u32 << n)))
        .collect();
    AccessStructure::general(n, &coalitions).expect("nonempty in-range coalitions")
}

fn random_structure<R: Rng>(rng: &mut R, max_n: usize) -> AccessStructure {
    if rng.gen_bool(0.5) {
        let n = rng.gen_range(1..=max_n);
        let k = rng.gen_range(1..=n);
        AccessStructure::threshold(n, k).expect("valid threshold")
    } else {
        random_general_structure(rng, max_n)
    }
}

fn lemma1_suite(opts: &VerifyOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("lemma1");
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let max_n = opts.cap(6);
    for instance in 0..200 {
        let gamma = random_structure(&mut rng, max_n);
        let n = gamma.n();
        let alpha = StrategyProfile::new((0..n).map(|_| rng.gen::<f64>()).collect())
            .expect("unit interval");
        let values = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
        let u = CommonGoodUtilities::new(values, rng.gen_range(0.1..2.0)).expect("positive cost");
        let i = rng.gen_range(1..=n);
        let label = format!("#{instance} {gamma} i={i}");
        let check = || -> Result<(f64, f64, f64)> {
            let e = |x| expected_utility(&gamma, &u, &alpha, i, x);
            let (e0, eh, e1) = (e(0.0)?, e(0.5)?, e(1.0)?);
            let f = f_gamma(&gamma, i, &alpha.others(i))?;
            let collinear = (eh - (e0 + e1) / 2.0).abs();
            let slope = (e1 - e0 - (f * u.value(i) - u.cost())).abs();
            let oracle = [0.0, 0.5, 1.0]
                .iter()
                .zip([e0, eh, e1])
                .map(|(&x, got)| {
                    (expected_utility_by_enumeration(&gamma, &u, &alpha, i, x) - got).abs()
                })
                .fold(0.0, f64::max);
            Ok((collinear, slope, oracle))
        };
        match check() {
            Ok((collinear, slope, oracle)) => out.record(
                collinear <= CHECK_TOL && slope <= CHECK_TOL && oracle <= CHECK_TOL,
                format!(
                    "{label} collinearity={collinear:.1e} slope={slope:.1e} oracle={oracle:.1e}"
                ),
            ),
            Err(e) => out.error(label, e),
        }
    }

    let t32 = AccessStructure::threshold(3, 2).expect("valid");
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (a1, a2): (f64, f64) = (rng.gen(), rng.gen());
        let pivot = pivot_probabilities(&t32, 3, &[a1, a2]).expect("valid");
        worst = worst
            .max((pivot.pivotal - (a1 * (1.0 - a2) + a2 * (1.0 - a1))).abs())
            .max((pivot.already - a1 * a2).abs());
    }
    out.record(
        worst <= CHECK_TOL,
        format!("two-of-three bracket, 100 draws, max error {worst:.1e}"),
    );

    let u = CommonGoodUtilities::uniform(3, 1.0, 0.5).expect("valid");
    let half = StrategyProfile::uniform(3, 0.5).expect("valid");
    let es: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&x| expected_utility(&t32, &u, &half, 3, x).expect("valid"))
        .collect();
    let spread = es.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - es.iter().cloned().fold(f64::INFINITY, f64::min);
    let g = g_gamma(&t32, 3, &[0.5, 0.5]).expect("valid");
    out.record(
        spread <= CHECK_TOL,
        format!(
            "inessential N=1 c=0.5 alpha=1/2: E={:.6} spread={spread:.1e} g={g}",
            es[0]
        ),
    );
    out
}

fn value_grid(n: usize) -> Vec<Vec<f64>> {
    (0..VALUE_GRID.len().pow(n as u32))
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let v = VALUE_GRID[idx % VALUE_GRID.len()];
                    idx /= VALUE_GRID.len();
                    v
                })
                .collect()
        })
        .collect()
}

fn theorem3_suite(opts: &VerifyOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("theorem3");
    let max_n = opts.cap(5);
    for n in 1..=max_n {
        for k in 1..=n {
            let gamma = AccessStructure::threshold(n, k).expect("valid");
            let grid = value_grid(n);
            let failed = grid.iter().find_map(|values| {
                let u = CommonGoodUtilities::new(values.clone(), 1.0).expect("valid");
                match verify_theorem3(&gamma, &u) {
                    Ok(r) if r.pass() => None,
                    Ok(r) => Some(format!(
                        "N={values:?}: brute={:?} predicted={:?} dominance_ok={}",
                        r.brute_force_ne, r.predicted_ne, r.dominance_ok
                    )),
                    Err(e) => Some(format!("N={values:?}: error: {e}")),
                }
            });
            match failed {
                None => out.record(true, format!("{gamma} {} value vectors", grid.len())),
                Some(why) => out.record(false, format!("{gamma} {why}")),
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for instance in 0..100 {
        let gamma = random_general_structure(&mut rng, max_n);
        let values: Vec<f64> = (0..gamma.n())
            .map(|_| VALUE_GRID[rng.gen_range(0..VALUE_GRID.len())])
            .collect();
        let u = CommonGoodUtilities::new(values.clone(), 1.0).expect("valid");
        let label = format!("#{instance} {gamma} N={values:?}");
        match verify_theorem3(&gamma, &u) {
            Ok(r) => out.record(
                r.pass(),
                format!(
                    "{label} ne={:?} predicted={:?}",
                    r.brute_force_ne, r.predicted_ne
                ),
            ),
            Err(e) => out.error(label, e),
        }
    }
    out
}

fn ht_suite(opts: &VerifyOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("ht");
    for n in 2..=opts.cap(5) {
        for k in 2..=n {
            let label = format!("n={n} k={k} A={n} B=1");
            match verify_ht_theorem(n, k, &GreedyUtilities::default_for(n)) {
                Ok(r) => out.record(
                    r.pass,
                    format!(
                        "{label} survivors={:?} payoff_equivalent_ne={}",
                        r.dominance_survivors,
                        r.payoff_equivalent_ne.len()
                    ),
                ),
                Err(e) => out.error(label, e),
            }
        }
    }
    out
}

/// The (n, k, depth) envelope checked by the async suite.
pub fn async_envelope() -> Vec<(usize, usize, usize)> {
    let mut cases: Vec<_> = (1..=5).map(|d| (2, 2, d)).collect();
    cases.extend((1..=4).map(|d| (3, 2, d)));
    cases.extend((1..=4).map(|d| (3, 3, d)));
    cases
}

fn async_suite(opts: &VerifyOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::new("async");
    let max_n = opts.max_n.unwrap_or(usize::MAX);
    for (n, k, depth) in async_envelope().into_iter().filter(|&(n, _, _)| n <= max_n) {
        let label = format!("n={n} k={k} depth={depth}");
        let report = AsyncGame::new(n, k, depth, GreedyUtilities::default_for(n))
            .and_then(|g| verify_theorem2(&g));
        match report {
            Ok(r) => {
                let mut line = format!(
                    "{label} nodes={} states={} learning_moves={} root={:?}",
                    r.nodes, r.states, r.learning_moves, r.root_values
                );
                if let Some(first) = r.counterexamples.first() {
                    line.push_str(&format!(" counterexample: {first}"));
                }
                out.record(r.pass, line);
            }
            Err(e) => out.error(label, e),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_subsets_counts() {
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(k_subsets(3, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn value_grid_covers_all_combinations() {
        let g = value_grid(2);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![0.5, 0.5]);
        assert_eq!(g[8], vec![5.0, 5.0]);
    }

    #[test]
    fn enumeration_oracle_matches_worked_example() {
        let t32 = AccessStructure::threshold(3, 2).unwrap();
        let u = CommonGoodUtilities::uniform(3, 4.0, 1.0).unwrap();
        let half = StrategyProfile::uniform(3, 0.5).unwrap();
        assert!((expected_utility_by_enumeration(&t32, &u, &half, 3, 1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn small_suites_pass() {
        let opts = VerifyOptions {
            max_n: Some(3),
            seed: 3,
        };
        for name in SUITES {
            let outcome = run_suite(name, &opts).unwrap();
            assert!(outcome.passed(), "{name}: {:#?}", outcome.lines);
        }
        assert!(run_suite("nope", &opts).is_none());
    }
}
