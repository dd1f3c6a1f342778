//! Sequential disclosure over a k-out-of-n scheme, solved by backward induction.
//!
//! Participants move in a fixed cyclic order. A move discloses some of the
//! shares the mover knows to some of the other participants; the mover learns
//! nothing from her own move. The game ends when somebody holds `k` shares, or
//! at the depth bound, where it pays the nobody-learns vector (all zeros).
//!
//! Ties are not broken. For each node the solver keeps the set of payoff
//! vectors reachable under some subgame perfect equilibrium: an outcome `v` of
//! child `m` is achievable iff `v[mover]` is at least the mover's worst
//! equilibrium payoff after every other move.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::access::Coalition;
use crate::error::{Error, Result};
use crate::game::{utility_greedy, GreedyUtilities, InfoVectorHT};
use crate::TOL;

pub const MAX_N: usize = 3;
pub const MAX_DEPTH: usize = 6;

/// Shares known by each participant; share `j` is bit `j - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnowledgeState {
    known: Vec<Coalition>,
}

impl KnowledgeState {
    pub fn initial(n: usize) -> Self {
        Self {
            known: (1..=n).map(|i| Coalition::from_members(&[i])).collect(),
        }
    }

    pub fn known_by(&self, i: usize) -> Coalition {
        self.known[i - 1]
    }

    pub fn n(&self) -> usize {
        self.known.len()
    }

    /// Participants holding at least `k` distinct shares.
    pub fn learners(&self, k: usize) -> Coalition {
        self.known
            .iter()
            .enumerate()
            .filter(|(_, s)| s.len() >= k)
            .fold(Coalition::EMPTY, |acc, (idx, _)| acc.with(idx + 1))
    }

    /// Every participant's knowledge here contains her knowledge in `earlier`.
    pub fn extends(&self, earlier: &KnowledgeState) -> bool {
        self.known
            .iter()
            .zip(&earlier.known)
            .all(|(now, before)| before.is_subset_of(*now))
    }
}

/// Disclose `disclosed` (share indices) to `recipients`. An empty side means pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Move {
    pub disclosed: Coalition,
    pub recipients: Coalition,
}

impl Move {
    pub const PASS: Move = Move {
        disclosed: Coalition::EMPTY,
        recipients: Coalition::EMPTY,
    };

    pub fn is_pass(&self) -> bool {
        self.disclosed.is_empty() || self.recipients.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Learned,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameNode {
    pub knowledge: KnowledgeState,
    pub mover: usize,
    pub depth: usize,
    pub terminal: Option<Termination>,
}

/// The game definition: scheme parameters, depth bound, move order and utilities.
#[derive(Debug, Clone)]
pub struct AsyncGame {
    n: usize,
    k: usize,
    depth_bound: usize,
    order: Vec<usize>,
    utilities: GreedyUtilities,
}

impl AsyncGame {
    /// Round-robin order `1, 2, ..., n, 1, ...`.
    pub fn new(n: usize, k: usize, depth_bound: usize, utilities: GreedyUtilities) -> Result<Self> {
        Self::with_order(n, k, depth_bound, utilities, (1..=n).collect())
    }

    /// `order` is repeated cyclically to decide who moves at each depth.
    pub fn with_order(
        n: usize,
        k: usize,
        depth_bound: usize,
        utilities: GreedyUtilities,
        order: Vec<usize>,
    ) -> Result<Self> {
        if n > MAX_N || depth_bound > MAX_DEPTH {
            return Err(Error::TooLarge(format!(
                "need n <= {MAX_N} and depth <= {MAX_DEPTH}, got n = {n}, depth = {depth_bound}"
            )));
        }
        if k < 1 || k > n {
            return Err(Error::BadThreshold { k, n });
        }
        if utilities.n() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: utilities.n(),
            });
        }
        if order.is_empty() {
            return Err(Error::EmptyInput("move order"));
        }
        if let Some(&bad) = order.iter().find(|&&i| i < 1 || i > n) {
            return Err(Error::OutOfRangeParticipant {
                participant: bad,
                n,
            });
        }
        Ok(Self {
            n,
            k,
            depth_bound,
            order,
            utilities,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    fn node(&self, knowledge: KnowledgeState, depth: usize) -> GameNode {
        let terminal = if !knowledge.learners(self.k).is_empty() {
            Some(Termination::Learned)
        } else if depth >= self.depth_bound {
            Some(Termination::Truncated)
        } else {
            None
        };
        GameNode {
            mover: self.order[depth % self.order.len()],
            knowledge,
            depth,
            terminal,
        }
    }

    pub fn root(&self) -> GameNode {
        self.node(KnowledgeState::initial(self.n), 0)
    }

    pub fn apply_move(&self, node: &GameNode, m: Move) -> Result<GameNode> {
        if node.terminal.is_some() {
            return Err(Error::InvalidMove("node is terminal".into()));
        }
        let own = node.knowledge.known_by(node.mover);
        if !m.disclosed.is_subset_of(own) {
            return Err(Error::InvalidMove(format!(
                "participant {} cannot disclose {} knowing only {}",
                node.mover, m.disclosed, own
            )));
        }
        if m.recipients.contains(node.mover) {
            return Err(Error::InvalidMove("the mover cannot be a recipient".into()));
        }
        if !m.recipients.is_subset_of(Coalition::full(self.n)) {
            return Err(Error::InvalidMove(format!(
                "recipients {} out of range",
                m.recipients
            )));
        }
        let mut knowledge = node.knowledge.clone();
        for r in m.recipients.members() {
            knowledge.known[r - 1] = knowledge.known[r - 1].union(m.disclosed);
        }
        Ok(self.node(knowledge, node.depth + 1))
    }

    /// Pass, then every nonempty disclosure to every nonempty recipient set.
    pub fn moves(&self, node: &GameNode) -> Vec<Move> {
        let own = node.knowledge.known_by(node.mover).mask();
        let others = Coalition::full(self.n).without(node.mover).mask();
        let mut out = vec![Move::PASS];
        for d in nonempty_submasks(own) {
            for r in nonempty_submasks(others) {
                out.push(Move {
                    disclosed: Coalition::from_mask(d),
                    recipients: Coalition::from_mask(r),
                });
            }
        }
        out
    }

    /// Terminal payoff: greedy utilities of the learners, or zeros on truncation.
    pub fn terminal_payoff(&self, node: &GameNode) -> Vec<f64> {
        let learned = match node.terminal {
            Some(Termination::Learned) => node.knowledge.learners(self.k),
            _ => Coalition::EMPTY,
        };
        let info = InfoVectorHT { learned };
        (1..=self.n)
            .map(|i| utility_greedy(&info, &self.utilities, i))
            .collect()
    }
}

fn nonempty_submasks(mask: u32) -> Vec<u32> {
    let mut out: Vec<u32> = (1..=mask).filter(|s| s & !mask == 0).collect();
    out.sort_unstable();
    out
}

type StateKey = (KnowledgeState, usize);

/// Solution at one reachable state.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSolution {
    pub terminal: Option<Termination>,
    pub mover: usize,
    /// Payoff vectors reachable under some subgame perfect equilibrium, sorted.
    pub values: Vec<Vec<f64>>,
    pub moves: Vec<Move>,
    /// Indices into `moves` that are optimal under some equilibrium.
    pub optimal: Vec<usize>,
    /// Size of the full (unshared) subtree rooted here.
    pub subtree_size: u64,
}

#[derive(Debug, Clone)]
pub struct SolvedTree {
    pub game: AsyncGame,
    pub states: BTreeMap<StateKey, NodeSolution>,
}

impl SolvedTree {
    fn key(node: &GameNode) -> StateKey {
        (node.knowledge.clone(), node.depth)
    }

    pub fn solution(&self, node: &GameNode) -> &NodeSolution {
        &self.states[&Self::key(node)]
    }

    pub fn root_values(&self) -> &[Vec<f64>] {
        &self.solution(&self.game.root()).values
    }

    pub fn tree_size(&self) -> u64 {
        self.solution(&self.game.root()).subtree_size
    }
}

fn min_for(values: &[Vec<f64>], player: usize) -> f64 {
    values
        .iter()
        .map(|v| v[player - 1])
        .fold(f64::INFINITY, f64::min)
}

fn solve_node(
    game: &AsyncGame,
    node: &GameNode,
    memo: &mut BTreeMap<StateKey, NodeSolution>,
) -> Result<()> {
    let key = SolvedTree::key(node);
    if memo.contains_key(&key) {
        return Ok(());
    }
    if node.terminal.is_some() {
        memo.insert(
            key,
            NodeSolution {
                terminal: node.terminal,
                mover: node.mover,
                values: vec![game.terminal_payoff(node)],
                moves: Vec::new(),
                optimal: Vec::new(),
                subtree_size: 1,
            },
        );
        return Ok(());
    }
    let moves = game.moves(node);
    let mut children = Vec::with_capacity(moves.len());
    for &m in &moves {
        let child = game.apply_move(node, m)?;
        solve_node(game, &child, memo)?;
        children.push(SolvedTree::key(&child));
    }
    let mover = node.mover;
    let worst: Vec<f64> = children
        .iter()
        .map(|c| min_for(&memo[c].values, mover))
        .collect();
    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut optimal = Vec::new();
    for (idx, c) in children.iter().enumerate() {
        let bar = worst
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != idx)
            .map(|(_, &w)| w)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut any = false;
        for v in &memo[c].values {
            if v[mover - 1] >= bar - TOL {
                any = true;
                if !values.contains(v) {
                    values.push(v.clone());
                }
            }
        }
        if any {
            optimal.push(idx);
        }
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite payoffs"));
    let subtree_size = 1 + children.iter().map(|c| memo[c].subtree_size).sum::<u64>();
    memo.insert(
        key,
        NodeSolution {
            terminal: None,
            mover,
            values,
            moves,
            optimal,
            subtree_size,
        },
    );
    Ok(())
}

pub fn backward_induction(game: &AsyncGame) -> Result<SolvedTree> {
    let mut states = BTreeMap::new();
    solve_node(game, &game.root(), &mut states)?;
    Ok(SolvedTree {
        game: game.clone(),
        states,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsyncReport {
    pub n: usize,
    pub k: usize,
    pub depth: usize,
    pub pass: bool,
    /// Nodes in the full game tree.
    pub nodes: u64,
    /// Distinct (knowledge, depth) states.
    pub states: usize,
    /// Moves that end the game by learning, each checked for the last-mover deviation.
    pub learning_moves: usize,
    pub root_values: Vec<Vec<f64>>,
    pub counterexamples: Vec<String>,
}

/// Checks, over every reachable state, that ending the game by disclosure hurts
/// the discloser, that passing instead is strictly better for her, and that no
/// such move is ever equilibrium play; also that the root value is all zeros.
pub fn verify_theorem2(game: &AsyncGame) -> Result<AsyncReport> {
    let tree = backward_induction(game)?;
    let mut counterexamples = Vec::new();
    let mut learning_moves = 0;
    for ((knowledge, depth), sol) in &tree.states {
        if sol.terminal.is_some() {
            continue;
        }
        let node = game.node(knowledge.clone(), *depth);
        let mover = sol.mover;
        let pass_child = game.apply_move(&node, Move::PASS)?;
        let pass_worst = min_for(&tree.solution(&pass_child).values, mover);
        for (idx, &m) in sol.moves.iter().enumerate() {
            let child = game.apply_move(&node, m)?;
            let at = || {
                format!(
                    "depth {depth}, mover {mover}, move {} -> {}",
                    m.disclosed, m.recipients
                )
            };
            if !child.knowledge.extends(&node.knowledge)
                || child.knowledge.known_by(mover) != knowledge.known_by(mover)
            {
                counterexamples.push(format!("knowledge not monotone at {}", at()));
            }
            if child.terminal != Some(Termination::Learned) {
                continue;
            }
            learning_moves += 1;
            let payoff = game.terminal_payoff(&child)[mover - 1];
            if child.knowledge.learners(game.k).contains(mover) {
                counterexamples.push(format!("last mover learned at {}", at()));
            }
            if payoff >= 0.0 {
                counterexamples.push(format!("last mover payoff {payoff} >= 0 at {}", at()));
            }
            if pass_worst <= payoff + TOL {
                counterexamples.push(format!(
                    "passing ({pass_worst}) does not beat ending ({payoff}) at {}",
                    at()
                ));
            }
            if sol.optimal.contains(&idx) {
                counterexamples.push(format!(
                    "game-ending disclosure is equilibrium play at {}",
                    at()
                ));
            }
        }
    }
    let root_values = tree.root_values().to_vec();
    if root_values.iter().any(|v| v.iter().any(|&x| x != 0.0)) {
        counterexamples.push(format!("root value {root_values:?} is not all zeros"));
    }
    Ok(AsyncReport {
        n: game.n,
        k: game.k,
        depth: game.depth_bound,
        pass: counterexamples.is_empty(),
        nodes: tree.tree_size(),
        states: tree.states.len(),
        learning_moves,
        root_values,
        counterexamples,
    })
}
