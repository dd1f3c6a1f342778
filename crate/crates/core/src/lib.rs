//! Rational secret sharing: Shamir sharing over prime fields, access
//! structures, and the reconstruction games played by selfish participants.

pub mod access;
pub mod async_game;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod field;
pub mod game;
pub mod montecarlo;
pub mod shamir;

pub use access::{AccessSpec, AccessStructure, Coalition};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use game::{CommonGoodUtilities, GreedyUtilities, StrategyProfile};

/// Absolute tolerance for comparing payoffs and margins.
pub const TOL: f64 = 1e-9;
