//! Pure Nash equilibria, iterated weak dominance, and the characterization
//! checks for both utility models.
//!
//! Both reconstruction games are binary-action games: a pure profile is the
//! coalition of participants who disclose. Everything here is exhaustive over
//! the `2^n` profiles.

use rayon::prelude::*;
use serde::Serialize;

use crate::access::{AccessStructure, Coalition};
use crate::error::{Error, Result};
use crate::game::{
    learners, outcome_v, pivot_probabilities, utility_greedy, utility_v, CommonGoodUtilities,
    GreedyUtilities, StrategyProfile,
};
use crate::TOL;

pub const COMMON_GOOD_MAX_N: usize = 20;
pub const BROADCAST_MAX_N: usize = 12;

/// A simultaneous game in which every participant discloses or abstains.
pub trait BinaryActionGame: Sync {
    fn n(&self) -> usize;

    fn max_n(&self) -> usize;

    /// Payoff of participant `i` when exactly `revealers` disclose.
    fn payoff(&self, revealers: Coalition, i: usize) -> f64;

    fn check_size(&self) -> Result<()> {
        if self.n() > self.max_n() {
            return Err(Error::TooLarge(format!(
                "n = {} exceeds {}",
                self.n(),
                self.max_n()
            )));
        }
        Ok(())
    }
}

/// The common-good reconstruction game over an arbitrary access structure.
#[derive(Debug, Clone, Copy)]
pub struct CommonGoodGame<'a> {
    gamma: &'a AccessStructure,
    utilities: &'a CommonGoodUtilities,
}

impl<'a> CommonGoodGame<'a> {
    pub fn new(gamma: &'a AccessStructure, utilities: &'a CommonGoodUtilities) -> Result<Self> {
        if utilities.n() != gamma.n() {
            return Err(Error::LengthMismatch {
                expected: gamma.n(),
                got: utilities.n(),
            });
        }
        Ok(Self { gamma, utilities })
    }
}

impl BinaryActionGame for CommonGoodGame<'_> {
    fn n(&self) -> usize {
        self.gamma.n()
    }

    fn max_n(&self) -> usize {
        COMMON_GOOD_MAX_N
    }

    fn payoff(&self, revealers: Coalition, i: usize) -> f64 {
        utility_v(&outcome_v(self.gamma, revealers), self.utilities, i)
    }
}

/// The synchronous broadcast game over a k-out-of-n scheme with greedy utilities.
#[derive(Debug, Clone, Copy)]
pub struct BroadcastGame {
    k: usize,
    utilities: GreedyUtilities,
}

impl BroadcastGame {
    pub fn new(k: usize, utilities: GreedyUtilities) -> Result<Self> {
        let n = utilities.n();
        if k < 1 || k > n {
            return Err(Error::BadThreshold { k, n });
        }
        Ok(Self { k, utilities })
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

impl BinaryActionGame for BroadcastGame {
    fn n(&self) -> usize {
        self.utilities.n()
    }

    fn max_n(&self) -> usize {
        BROADCAST_MAX_N
    }

    fn payoff(&self, revealers: Coalition, i: usize) -> f64 {
        utility_greedy(&learners(revealers, self.k, self.n()), &self.utilities, i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    Reveal,
    Abstain,
    Inessential,
}

/// Best response of one participant, classified by `margin = f * N_i - c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponse {
    pub kind: ResponseKind,
    pub margin: f64,
}

impl BestResponse {
    fn from_margin(margin: f64) -> Self {
        let kind = if margin > TOL {
            ResponseKind::Reveal
        } else if margin < -TOL {
            ResponseKind::Abstain
        } else {
            ResponseKind::Inessential
        };
        Self { kind, margin }
    }
}

/// Expected utility is linear in the own disclosure probability with slope
/// `f * N_i - c`, so its sign decides the best response.
pub fn best_response(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
    i: usize,
) -> Result<BestResponse> {
    if alpha.n() != gamma.n() || u.n() != gamma.n() {
        return Err(Error::LengthMismatch {
            expected: gamma.n(),
            got: if alpha.n() != gamma.n() {
                alpha.n()
            } else {
                u.n()
            },
        });
    }
    let f = pivot_probabilities(gamma, i, &alpha.others(i))?.pivotal;
    Ok(BestResponse::from_margin(f * u.value(i) - u.cost()))
}

/// Best responses at a (possibly mixed) profile and whether it is an equilibrium:
/// every interior player must be inessential and every pure player must play a best response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileCheck {
    pub best_responses: Vec<BestResponse>,
    pub inessential: Vec<usize>,
    pub is_equilibrium: bool,
}

pub fn check_profile(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
    alpha: &StrategyProfile,
) -> Result<ProfileCheck> {
    let best_responses = (1..=gamma.n())
        .map(|i| best_response(gamma, u, alpha, i))
        .collect::<Result<Vec<_>>>()?;
    let inessential = best_responses
        .iter()
        .enumerate()
        .filter(|(_, br)| br.kind == ResponseKind::Inessential)
        .map(|(idx, _)| idx + 1)
        .collect();
    let is_equilibrium = best_responses
        .iter()
        .zip(alpha.alpha())
        .all(|(br, &a)| match br.kind {
            ResponseKind::Inessential => true,
            ResponseKind::Reveal => a == 1.0,
            ResponseKind::Abstain => a == 0.0,
        });
    Ok(ProfileCheck {
        best_responses,
        inessential,
        is_equilibrium,
    })
}

/// A pure equilibrium; `payoff_equivalent` marks that some unilateral flip leaves
/// the deviator's payoff unchanged (within tolerance).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PureEquilibrium {
    pub profile: Coalition,
    pub payoff_equivalent: bool,
}

/// All pure profiles where no player strictly gains (by more than the tolerance) from flipping.
pub fn pure_equilibria<G: BinaryActionGame>(game: &G) -> Result<Vec<PureEquilibrium>> {
    game.check_size()?;
    let n = game.n();
    Ok((0u32..1 << n)
        .into_par_iter()
        .filter_map(|mask| {
            let s = Coalition::from_mask(mask);
            let mut payoff_equivalent = false;
            for i in 1..=n {
                let flipped = Coalition::from_mask(mask ^ 1 << (i - 1));
                let gain = game.payoff(flipped, i) - game.payoff(s, i);
                if gain > TOL {
                    return None;
                }
                payoff_equivalent |= gain >= -TOL;
            }
            Some(PureEquilibrium {
                profile: s,
                payoff_equivalent,
            })
        })
        .collect())
}

pub fn enumerate_pure_ne<G: BinaryActionGame>(game: &G) -> Result<Vec<Coalition>> {
    Ok(pure_equilibria(game)?
        .into_iter()
        .map(|e| e.profile)
        .collect())
}

fn require_no_tie(u: &CommonGoodUtilities) -> Result<()> {
    match u.first_tie() {
        Some((participant, value)) => Err(Error::DegenerateTie { participant, value }),
        None => Ok(()),
    }
}

/// Equilibria predicted by the characterization: `v_X` for every minimal
/// authorized `X` whose members all value the good above the cost, plus the
/// zero vector unless some self-sufficient participant has `N_i > c`.
pub fn predicted_equilibria(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
) -> Result<Vec<Coalition>> {
    if u.n() != gamma.n() {
        return Err(Error::LengthMismatch {
            expected: gamma.n(),
            got: u.n(),
        });
    }
    require_no_tie(u)?;
    let eager = |i: usize| u.value(i) > u.cost();
    let mut out: Vec<Coalition> = gamma
        .min_coalitions()
        .iter()
        .copied()
        .filter(|x| x.members().into_iter().all(eager))
        .collect();
    if !gamma.self_sufficient().into_iter().any(eager) {
        out.push(Coalition::EMPTY);
    }
    out.sort_unstable();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Abstain,
    Reveal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Deletion {
    pub round: usize,
    pub player: usize,
    pub deleted: Action,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DominanceResult {
    /// `surviving[i - 1]` lists player i's remaining actions.
    pub surviving: Vec<Vec<Action>>,
    pub deletions: Vec<Deletion>,
    #[serde(skip)]
    pub survivors: Vec<Coalition>,
}

impl DominanceResult {
    pub fn survives(&self, profile: Coalition) -> bool {
        self.surviving.iter().enumerate().all(|(idx, acts)| {
            let a = if profile.contains(idx + 1) {
                Action::Reveal
            } else {
                Action::Abstain
            };
            acts.contains(&a)
        })
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Comparison {
    reveal_never_worse: bool,
    reveal_sometimes_better: bool,
    abstain_never_worse: bool,
    abstain_sometimes_better: bool,
}

impl Comparison {
    fn abstain_dominates(&self) -> bool {
        self.abstain_never_worse && self.abstain_sometimes_better
    }

    fn reveal_dominates(&self) -> bool {
        self.reveal_never_worse && self.reveal_sometimes_better
    }
}

/// Compares player i's two actions against every opponent profile drawn from
/// the surviving sets. `fixed` holds opponents restricted to Reveal, `free` the
/// opponents with both actions alive.
fn compare_actions<G: BinaryActionGame>(game: &G, i: usize, fixed: u32, free: u32) -> Comparison {
    let bit = 1u32 << (i - 1);
    let mut cmp = Comparison {
        reveal_never_worse: true,
        abstain_never_worse: true,
        ..Default::default()
    };
    let mut sub = 0u32;
    loop {
        let others = Coalition::from_mask(fixed | sub);
        let diff =
            game.payoff(Coalition::from_mask(others.mask() | bit), i) - game.payoff(others, i);
        if diff > TOL {
            cmp.reveal_sometimes_better = true;
            cmp.abstain_never_worse = false;
        } else if diff < -TOL {
            cmp.abstain_sometimes_better = true;
            cmp.reveal_never_worse = false;
        }
        sub = sub.wrapping_sub(free) & free;
        if sub == 0 {
            break;
        }
    }
    cmp
}

fn opponent_masks(alive: &[[bool; 2]], i: usize) -> (u32, u32) {
    let mut fixed = 0u32;
    let mut free = 0u32;
    for (idx, a) in alive.iter().enumerate() {
        if idx + 1 == i {
            continue;
        }
        match (a[0], a[1]) {
            (true, true) => free |= 1 << idx,
            (false, true) => fixed |= 1 << idx,
            _ => {}
        }
    }
    (fixed, free)
}

/// Iterated deletion of weakly dominated actions. Each round scans players in
/// ascending order and deletes at most one action per player, judged against
/// the surviving sets as they stood when the round began; rounds repeat until
/// nothing changes.
pub fn iterated_weak_dominance<G: BinaryActionGame>(game: &G) -> Result<DominanceResult> {
    game.check_size()?;
    let n = game.n();
    // alive[i] = [abstain, reveal]
    let mut alive = vec![[true, true]; n];
    let mut deletions = Vec::new();
    let mut round = 0;
    loop {
        round += 1;
        let mut changed = false;
        let start = alive.clone();
        for i in 1..=n {
            if start[i - 1] != [true, true] {
                continue;
            }
            let (fixed, free) = opponent_masks(&start, i);
            let cmp = compare_actions(game, i, fixed, free);
            let deleted = if cmp.abstain_dominates() {
                alive[i - 1][1] = false;
                Action::Reveal
            } else if cmp.reveal_dominates() {
                alive[i - 1][0] = false;
                Action::Abstain
            } else {
                continue;
            };
            deletions.push(Deletion {
                round,
                player: i,
                deleted,
            });
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let surviving: Vec<Vec<Action>> = alive
        .iter()
        .map(|a| {
            let mut acts = Vec::new();
            if a[0] {
                acts.push(Action::Abstain);
            }
            if a[1] {
                acts.push(Action::Reveal);
            }
            acts
        })
        .collect();
    let mut result = DominanceResult {
        surviving,
        deletions,
        survivors: Vec::new(),
    };
    let (fixed, free) = opponent_masks(&alive, 0);
    let mut sub = 0u32;
    loop {
        result.survivors.push(Coalition::from_mask(fixed | sub));
        sub = sub.wrapping_sub(free) & free;
        if sub == 0 {
            break;
        }
    }
    Ok(result)
}

/// Whether Abstain weakly dominates Reveal for player `i` over the full game.
pub fn abstain_weakly_dominates<G: BinaryActionGame>(game: &G, i: usize) -> bool {
    let free = Coalition::full(game.n()).without(i).mask();
    compare_actions(game, i, 0, free).abstain_dominates()
}

fn indicators(profiles: &[Coalition], n: usize) -> Vec<Vec<u8>> {
    profiles.iter().map(|c| c.indicator(n)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurvivalEntry {
    pub profile: Vec<u8>,
    pub survives: bool,
}

/// Brute-force versus predicted equilibria in the common-good model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquilibriumReport {
    pub brute_force_ne: Vec<Vec<u8>>,
    pub predicted_ne: Vec<Vec<u8>>,
    /// The sets coincide and every predicted equilibrium survives dominance.
    #[serde(rename = "match")]
    pub matches: bool,
    /// Brute-force and predicted sets coincide.
    pub sets_equal: bool,
    pub flags: Vec<String>,
    pub survives_dominance: Vec<SurvivalEntry>,
    /// Every predicted equilibrium survives iterated weak dominance.
    pub dominance_ok: bool,
    pub dominance_survivors: Vec<Vec<u8>>,
}

impl EquilibriumReport {
    pub fn pass(&self) -> bool {
        self.matches
    }
}

pub fn verify_theorem3(
    gamma: &AccessStructure,
    u: &CommonGoodUtilities,
) -> Result<EquilibriumReport> {
    let game = CommonGoodGame::new(gamma, u)?;
    let predicted = predicted_equilibria(gamma, u)?;
    let brute = enumerate_pure_ne(&game)?;
    let dominance = iterated_weak_dominance(&game)?;
    let n = gamma.n();

    let mut listed = brute.clone();
    listed.extend(predicted.iter().copied());
    listed.sort_unstable();
    listed.dedup();
    let survives_dominance = listed
        .iter()
        .map(|&s| SurvivalEntry {
            profile: s.indicator(n),
            survives: dominance.survives(s),
        })
        .collect();
    let sets_equal = brute == predicted;
    let dominance_ok = predicted.iter().all(|&s| dominance.survives(s));
    Ok(EquilibriumReport {
        brute_force_ne: indicators(&brute, n),
        predicted_ne: indicators(&predicted, n),
        matches: sets_equal && dominance_ok,
        sets_equal,
        flags: u.degenerate_flags(),
        survives_dominance,
        dominance_ok,
        dominance_survivors: indicators(&dominance.survivors, n),
    })
}

/// Checks of the broadcast game's impossibility conclusion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadcastReport {
    pub n: usize,
    pub k: usize,
    /// Per player: Abstain weakly dominates Reveal.
    pub abstain_dominates: Vec<bool>,
    pub dominance_survivors: Vec<Vec<u8>>,
    pub nobody_learns_at_survivor: bool,
    pub brute_force_ne: Vec<Vec<u8>>,
    /// Equilibria sustained only because some deviation is payoff-equivalent.
    pub payoff_equivalent_ne: Vec<Vec<u8>>,
    pub pass: bool,
}

pub fn verify_ht_theorem(n: usize, k: usize, u: &GreedyUtilities) -> Result<BroadcastReport> {
    if k < 2 || k > n {
        return Err(Error::BadThreshold { k, n });
    }
    if n > BROADCAST_MAX_N {
        return Err(Error::TooLarge(format!(
            "n = {n} exceeds {BROADCAST_MAX_N}"
        )));
    }
    if u.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: u.n(),
        });
    }
    u.require_axioms()?;
    let game = BroadcastGame::new(k, *u)?;
    let abstain_dominates: Vec<bool> = (1..=n)
        .map(|i| abstain_weakly_dominates(&game, i))
        .collect();
    let dominance = iterated_weak_dominance(&game)?;
    let equilibria = pure_equilibria(&game)?;
    let only_zero = dominance.survivors == [Coalition::EMPTY];
    let nobody_learns_at_survivor =
        only_zero && learners(Coalition::EMPTY, k, n).learned.is_empty();
    let pass = abstain_dominates.iter().all(|&b| b) && only_zero && nobody_learns_at_survivor;
    Ok(BroadcastReport {
        n,
        k,
        abstain_dominates,
        dominance_survivors: indicators(&dominance.survivors, n),
        nobody_learns_at_survivor,
        brute_force_ne: equilibria.iter().map(|e| e.profile.indicator(n)).collect(),
        payoff_equivalent_ne: equilibria
            .iter()
            .filter(|e| e.payoff_equivalent)
            .map(|e| e.profile.indicator(n))
            .collect(),
        pass,
    })
}
