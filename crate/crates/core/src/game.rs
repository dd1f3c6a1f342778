//! The one-shot reconstruction game.
//!
//! Two outcome models share the same move space (each participant either
//! discloses her share or abstains):
//!
//! * the common-good model, where the outcome is whether the disclosing set is
//!   authorized and each participant pays `c` for disclosing and enjoys `N_i` on
//!   recovery;
//! * the greedy broadcast model over a k-out-of-n structure, where the outcome
//!   is who learns the secret, and utilities reward learning and penalize every
//!   other learner.
//!
//! For the common-good model the expected utility of participant `i` playing
//! disclosure probability `x` against independent opponents is
//! `x * (-c) + (x * f + g) * N_i`, with `f` the probability that the others form
//! an unauthorized set that `i` completes and `g` the probability that they are
//! authorized on their own.

use serde::{Deserialize, Serialize};

use crate::access::{AccessStructure, Coalition};
use crate::error::{Error, Result};

/// Per-participant disclosure probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    alpha: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = alpha.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::BadProbability(bad));
        }
        Ok(Self { alpha })
    }

    /// The pure profile in which exactly the members of `revealers` disclose.
    pub fn pure(revealers: Coalition, n: usize) -> Self {
        Self {
            alpha: (1..=n)
                .map(|i| if revealers.contains(i) { 1.0 } else { 0.0 })
                .collect(),
        }
    }

    pub fn uniform(n: usize, a: f64) -> Result<Self> {
        Self::new(vec![a; n])
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Probability of participant `i` (1-based).
    pub fn get(&self, i: usize) -> f64 {
        self.alpha[i - 1]
    }

    pub fn is_pure(&self) -> bool {
        self.alpha.iter().all(|&a| a == 0.0 || a == 1.0)
    }

    /// Probabilities of every participant except `i`, in ascending id order.
    pub fn others(&self, i: usize) -> Vec<f64> {
        self.alpha
            .iter()
            .enumerate()
            .filter(|&(j, _)| j + 1 != i)
            .map(|(_, &a)| a)
            .collect()
    }
}

/// Outcome in the common-good model: whether the secret was recovered, and who took part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InfoVectorV {
    pub recovered: bool,
    pub participants: Coalition,
}

/// Outcome in the greedy model: who learned the secret.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InfoVectorHT {
    pub learned: Coalition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommonGoodUtilities {
    values: Vec<f64>,
    cost: f64,
}

impl CommonGoodUtilities {
    /// `values[i - 1]` is participant i's value of the common good; `cost` must be positive.
    pub fn new(values: Vec<f64>, cost: f64) -> Result<Self> {
        if !(cost.is_finite() && cost > 0.0) {
            return Err(Error::BadUtilities(format!(
                "participation cost must be > 0, got {cost}"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::BadUtilities(format!("non-finite value {v}")));
        }
        if values.is_empty() {
            return Err(Error::BadUtilities("no participant values".into()));
        }
        Ok(Self { values, cost })
    }

    pub fn uniform(n: usize, value: f64, cost: f64) -> Result<Self> {
        Self::new(vec![value; n], cost)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Human-readable warnings for values outside the standing assumptions.
    pub fn degenerate_flags(&self) -> Vec<String> {
        let mut flags = Vec::new();
        for (idx, &v) in self.values.iter().enumerate() {
            let i = idx + 1;
            if v <= 0.0 {
                flags.push(format!("participant {i}: N = {v} <= 0"));
            }
            if (v - self.cost).abs() <= crate::TOL {
                flags.push(format!("participant {i}: N = c = {v} (tie)"));
            }
        }
        flags
    }

    /// First participant whose value ties the cost, if any.
    pub fn first_tie(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .find(|(_, &v)| (v - self.cost).abs() <= crate::TOL)
            .map(|(idx, &v)| (idx + 1, v))
    }
}

/// The family `u_i = A * t_i - B * sum_{j != i} t_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyUtilities {
    reward: f64,
    penalty: f64,
    n: usize,
}

impl GreedyUtilities {
    pub fn new(reward: f64, penalty: f64, n: usize) -> Result<Self> {
        if !(reward.is_finite() && reward > 0.0 && penalty.is_finite() && penalty > 0.0) {
            return Err(Error::BadUtilities(format!(
                "greedy utilities need A > 0 and B > 0, got A = {reward}, B = {penalty}"
            )));
        }
        if n == 0 {
            return Err(Error::BadUtilities("no participants".into()));
        }
        Ok(Self { reward, penalty, n })
    }

    /// `A = n`, `B = 1`.
    pub fn default_for(n: usize) -> Self {
        Self {
            reward: n as f64,
            penalty: 1.0,
            n,
        }
    }

    pub fn reward(&self) -> f64 {
        self.reward
    }

    pub fn penalty(&self) -> f64 {
        self.penalty
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Whether `A > B * (n - 1)`, the condition under which the ordinal axioms hold.
    pub fn meets_axiom_bound(&self) -> bool {
        self.reward > self.penalty * (self.n as f64 - 1.0)
    }

    pub fn require_axioms(&self) -> Result<()> {
        if self.meets_axiom_bound() {
            Ok(())
        } else {
            Err(Error::AxiomViolation {
                reward: self.reward,
                bound: self.penalty * (self.n as f64 - 1.0),
            })
        }
    }
}

/// A built utility model.
#[derive(Debug, Clone, PartialEq)]
pub enum UtilityModel {
    CommonGood(CommonGoodUtilities),
    Greedy(GreedyUtilities),
}

impl UtilityModel {
    /// Classification of the good the secret unlocks.
    pub fn good_label(&self) -> &'static str {
        match self {
            UtilityModel::CommonGood(_) => "non_rivalrous_non_excludable",
            UtilityModel::Greedy(_) => "rivalrous_excludable",
        }
    }
}

/// Serialized utility model as found in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilitySpec {
    CommonGood {
        #[serde(rename = "N")]
        values: Vec<f64>,
        c: f64,
    },
    Greedy {
        #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
        reward: Option<f64>,
        #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
        penalty: Option<f64>,
    },
}

impl UtilitySpec {
    /// Builds the model for `n` participants; greedy parameters default to `A = n`, `B = 1`.
    pub fn build(&self, n: usize) -> Result<UtilityModel> {
        match self {
            UtilitySpec::CommonGood { values, c } => {
                if values.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: values.len(),
                    });
                }
                Ok(UtilityModel::CommonGood(CommonGoodUtilities::new(
                    values.clone(),
                    *c,
                )?))
            }
            UtilitySpec::Greedy { reward, penalty } => Ok(UtilityModel::Greedy(
                GreedyUtilities::new(reward.unwrap_or(n as f64), penalty.unwrap_or(1.0), n)?,
            )),
        }
    }
}

pub fn outcome_v(gamma: &AccessStructure, participants: Coalition) -> InfoVectorV {
    InfoVectorV {
        recovered: gamma.authorizes(participants),
        participants,
    }
}

pub fn utility_v(info: &InfoVectorV, u: &CommonGoodUtilities, i: usize) -> f64 {
    let paid = if info.participants.contains(i) {
        u.cost
    } else {
        0.0
    };
    let gained = if info.recovered { u.value(i) } else { 0.0 };
    gained - paid
}

/// Who learns under broadcast disclosure in a k-out-of-n scheme.
///
/// With at least `k` shares public everyone learns; with exactly `k - 1` public,
/// each abstainer combines them with her own share and the revealers learn
/// nothing; with fewer nobody learns.
pub fn learners(revealers: Coalition, k: usize, n: usize) -> InfoVectorHT {
    let all = Coalition::full(n);
    let r = revealers.len();
    let learned = if r >= k {
        all
    } else if r + 1 == k {
        Coalition::from_mask(all.mask() & !revealers.mask())
    } else {
        Coalition::EMPTY
    };
    InfoVectorHT { learned }
}

pub fn utility_greedy(info: &InfoVectorHT, u: &GreedyUtilities, i: usize) -> f64 {
    let own = info.learned.contains(i);
    let others = info.learned.len() - usize::from(own);
    let gain = if own { u.reward } else { 0.0 };
    gain - u.penalty * others as f64
}

pub const AXIOM_AUDIT_MAX_N: usize = 12;

/// Checks the ordinal axioms and the zero normalization over all pairs of
/// learned-vectors. Returns whether every check holds.
#[allow(clippy::needless_range_loop)]
pub fn greedy_axiom_audit(u: &GreedyUtilities) -> Result<bool> {
    let n = u.n;
    if n > AXIOM_AUDIT_MAX_N {
        return Err(Error::AuditTooLarge(format!(
            "n = {n} exceeds {AXIOM_AUDIT_MAX_N}"
        )));
    }
    let size = 1u32 << n;
    let table: Vec<Vec<f64>> = (0..size)
        .map(|m| {
            let info = InfoVectorHT {
                learned: Coalition::from_mask(m),
            };
            (1..=n).map(|i| utility_greedy(&info, u, i)).collect()
        })
        .collect();
    if table[0].iter().any(|&v| v != 0.0) {
        return Ok(false);
    }
    for t in 0..size {
        for t2 in 0..size {
            for i in 0..n {
                let bit = 1u32 << i;
                let (ti, t2i) = (t & bit != 0, t2 & bit != 0);
                // learning beats not learning whatever else happens
                if ti && !t2i && table[t as usize][i] <= table[t2 as usize][i] {
                    return Ok(false);
                }
                // same own status, weakly fewer other learners, strictly fewer somewhere
                let (rest, rest2) = (t & !bit, t2 & !bit);
                if ti == t2i
                    && rest & !rest2 == 0
                    && rest != rest2
                    && table[t as usize][i] <= table[t2 as usize][i]
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The three-way split of the others' disclosure distribution from participant i's view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotProbabilities {
    /// Others unauthorized, but authorized once `i` joins (`f`).
    pub pivotal: f64,
    /// Others authorized without `i` (`g`).
    pub already: f64,
    /// Unauthorized with or without `i`.
    pub never: f64,
}

/// Inserts a zero bit at participant `i`'s position, mapping a mask over the
/// other `n - 1` participants to a coalition over all `n`.
fn spread_others(mask: u32, i: usize) -> Coalition {
    let low = mask & ((1u32 << (i - 1)) - 1);
    let high = (mask >> (i - 1)) << i;
    Coalition::from_mask(low | high)
}

pub fn pivot_probabilities(
    gamma: &AccessStructure,
    i: usize,
    alpha_others: &[f64],
) -> Result<PivotProbabilities> {
    gamma.check_participant(i)?;
    let n = gamma.n();
    if alpha_others.len() != n - 1 {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            got: alpha_others.len(),
        });
    }
    if let Some(&bad) = alpha_others.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::BadProbability(bad));
    }
    let mut out = PivotProbabilities {
        pivotal: 0.0,
        already: 0.0,
        never: 0.0,
    };
    for mask in 0u32..1 << (n - 1) {
        let prob: f64 = alpha_others
            .iter()
            .enumerate()
            .map(|(j, &a)| if mask & (1 << j) != 0 { a } else { 1.0 - a })
            .product();
        if prob == 0.0 {
            continue;
        }
        let s = spread_others(mask, i);
        if gamma.authorizes(s) {
            out.already += prob;
        } else if gamma.authorizes(s.with(i)) {
            out.pivotal += prob;
        } else {
            out.never += prob;
        }
    }
    Ok(out)
}

/// Probability that `i` is pivotal: the others are unauthorized but become authorized with `i`.
pub fn f_gamma(gamma: &AccessStructure, i: usize, alpha_others: &[f64]) -> Result<f64> {
    Ok(pivot_probabilities(gamma, i, alpha_others)?.pivotal)
}

/// Probability that the others are authorized without `i`.
pub fn g_gamma(gamma: &AccessStructure, i: usize, alpha_others: &[f64]) -> Result<f64> {
    Ok(pivot_probabilities(gamma, i, alpha_others)?.already)
}

fn check_lengths(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
) -> Result<()> {
    for got in [u.n(), alpha.n()] {
        if got != gamma.n() {
            return Err(Error::LengthMismatch {
                expected: gamma.n(),
                got,
            });
        }
    }
    Ok(())
}

/// Expected utility of participant `i` disclosing with probability `x` while the
/// others play `alpha` (participant i's own entry of `alpha` is ignored).
pub fn expected_utility(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
    i: usize,
    x: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::BadProbability(x));
    }
    check_lengths(gamma, u, alpha)?;
    let pivot = pivot_probabilities(gamma, i, &alpha.others(i))?;
    Ok(x * -u.cost + (x * pivot.pivotal + pivot.already) * u.value(i))
}

/// Expected utility of every participant at the profile itself.
pub fn expected_utilities(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
) -> Result<Vec<f64>> {
    (1..=gamma.n())
        .map(|i| expected_utility(gamma, u, alpha, i, alpha.get(i)))
        .collect()
}
