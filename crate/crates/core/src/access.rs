//! Monotone access structures over participants `1..=n`.
//!
//! A structure is stored as the antichain of its minimal authorized coalitions
//! together with a precomputed membership table over all `2^n` subsets, which
//! keeps authorization queries O(1) inside the exhaustive game analyses.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_PARTICIPANTS: usize = 20;

/// A set of participants; participant `i` (1-based) is bit `i - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    /// Builds a coalition from 1-based participant ids. Ids must be in `1..=32`.
    pub fn from_members(members: &[usize]) -> Self {
        Coalition(members.iter().fold(0u32, |m, &i| m | 1 << (i - 1)))
    }

    /// The coalition `{1, ..., n}`.
    pub fn full(n: usize) -> Self {
        Coalition(if n >= 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, participant: usize) -> bool {
        (1..=32).contains(&participant) && self.0 & (1 << (participant - 1)) != 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn with(self, participant: usize) -> Self {
        Coalition(self.0 | 1 << (participant - 1))
    }

    pub fn without(self, participant: usize) -> Self {
        Coalition(self.0 & !(1 << (participant - 1)))
    }

    pub fn union(self, other: Coalition) -> Self {
        Coalition(self.0 | other.0)
    }

    /// Members in ascending order, 1-based.
    pub fn members(self) -> Vec<usize> {
        (1..=32).filter(|&i| self.contains(i)).collect()
    }

    /// Characteristic 0/1 vector of length `n`.
    pub fn indicator(self, n: usize) -> Vec<u8> {
        (1..=n).map(|i| u8::from(self.contains(i))).collect()
    }

    pub fn from_indicator(bits: &[u8]) -> Self {
        Coalition(
            bits.iter()
                .enumerate()
                .fold(0u32, |m, (i, &b)| if b != 0 { m | 1 << i } else { m }),
        )
    }
}

/// Serialized as the sorted list of member ids.
impl Serialize for Coalition {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.members())
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.members().iter().map(usize::to_string).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

/// A monotone access structure, given by its minimal authorized coalitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccessStructure {
    n: usize,
    min_coalitions: Vec<Coalition>,
    threshold: Option<usize>,
    authorized: Vec<bool>,
}

impl AccessStructure {
    /// The k-out-of-n structure: every coalition of at least `k` participants.
    pub fn threshold(n: usize, k: usize) -> Result<Self> {
        check_n(n)?;
        if k < 1 || k > n {
            return Err(Error::BadThreshold { k, n });
        }
        let min_coalitions = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(Coalition)
            .collect();
        let authorized = (0u32..1 << n)
            .map(|m| m.count_ones() as usize >= k)
            .collect();
        Ok(Self {
            n,
            min_coalitions,
            threshold: Some(k),
            authorized,
        })
    }

    /// Builds a structure from any generating list; supersets of other entries are dropped.
    pub fn general(n: usize, coalitions: &[Coalition]) -> Result<Self> {
        check_n(n)?;
        if coalitions.is_empty() {
            return Err(Error::EmptyList);
        }
        let full = Coalition::full(n);
        for c in coalitions {
            if c.is_empty() {
                return Err(Error::EmptyCoalition);
            }
            if !c.is_subset_of(full) {
                let participant = c.members().into_iter().find(|&i| i > n).unwrap_or(n + 1);
                return Err(Error::OutOfRangeParticipant { participant, n });
            }
        }
        let mut min_coalitions: Vec<Coalition> = coalitions
            .iter()
            .copied()
            .filter(|c| !coalitions.iter().any(|d| d != c && d.is_subset_of(*c)))
            .collect();
        min_coalitions.sort_unstable();
        min_coalitions.dedup();

        let mut authorized = vec![false; 1 << n];
        for c in &min_coalitions {
            authorized[c.0 as usize] = true;
        }
        for mask in 1usize..1 << n {
            if !authorized[mask] {
                let mut rest = mask;
                while rest != 0 {
                    let bit = rest & rest.wrapping_neg();
                    if authorized[mask ^ bit] {
                        authorized[mask] = true;
                        break;
                    }
                    rest ^= bit;
                }
            }
        }
        let mut gamma = Self {
            n,
            min_coalitions,
            threshold: None,
            authorized,
        };
        gamma.threshold = gamma.detect_threshold();
        Ok(gamma)
    }

    /// Parses 1-based member lists, as found in config files.
    pub fn general_from_ids(n: usize, coalitions: &[Vec<usize>]) -> Result<Self> {
        check_n(n)?;
        let mut parsed = Vec::with_capacity(coalitions.len());
        for members in coalitions {
            if members.is_empty() {
                return Err(Error::EmptyCoalition);
            }
            if let Some(&bad) = members.iter().find(|&&i| i < 1 || i > n) {
                return Err(Error::OutOfRangeParticipant {
                    participant: bad,
                    n,
                });
            }
            parsed.push(Coalition::from_members(members));
        }
        Self::general(n, &parsed)
    }

    fn detect_threshold(&self) -> Option<usize> {
        let k = self.min_coalitions[0].len();
        let all_size_k = (0u32..1 << self.n)
            .all(|m| (m.count_ones() as usize >= k) == self.authorized[m as usize]);
        all_size_k.then_some(k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Minimal authorized coalitions in ascending mask order.
    pub fn min_coalitions(&self) -> &[Coalition] {
        &self.min_coalitions
    }

    /// `Some(k)` when the structure authorizes exactly the coalitions of size >= k.
    pub fn threshold_k(&self) -> Option<usize> {
        self.threshold
    }

    pub fn is_authorized(&self, s: Coalition) -> Result<bool> {
        self.check_coalition(s)?;
        Ok(self.authorized[s.0 as usize])
    }

    /// Unchecked membership test for hot loops; `s` must lie within `{1..n}`.
    pub(crate) fn authorizes(&self, s: Coalition) -> bool {
        self.authorized[s.0 as usize]
    }

    pub fn is_self_sufficient(&self, participant: usize) -> Result<bool> {
        self.check_participant(participant)?;
        Ok(self.authorized[1 << (participant - 1)])
    }

    pub fn self_sufficient(&self) -> Vec<usize> {
        (1..=self.n)
            .filter(|&i| self.authorized[1 << (i - 1)])
            .collect()
    }

    pub fn check_participant(&self, participant: usize) -> Result<()> {
        if participant < 1 || participant > self.n {
            return Err(Error::OutOfRangeParticipant {
                participant,
                n: self.n,
            });
        }
        Ok(())
    }

    fn check_coalition(&self, s: Coalition) -> Result<()> {
        if let Some(&participant) = s.members().iter().find(|&&i| i > self.n) {
            return Err(Error::OutOfRangeParticipant {
                participant,
                n: self.n,
            });
        }
        Ok(())
    }

    pub fn to_spec(&self) -> AccessSpec {
        match self.threshold {
            Some(k) => AccessSpec::Threshold { n: self.n, k },
            None => AccessSpec::General {
                n: self.n,
                min_coalitions: self.min_coalitions.iter().map(|c| c.members()).collect(),
            },
        }
    }
}

impl fmt::Display for AccessStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.threshold {
            Some(k) => write!(f, "threshold(n={},k={})", self.n, k),
            None => {
                let cs: Vec<String> = self.min_coalitions.iter().map(|c| c.to_string()).collect();
                write!(f, "general(n={},[{}])", self.n, cs.join(","))
            }
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if !(1..=MAX_PARTICIPANTS).contains(&n) {
        return Err(Error::BadParticipantCount(n));
    }
    Ok(())
}

/// Serialized form used in config files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AccessSpec {
    Threshold {
        n: usize,
        k: usize,
    },
    General {
        n: usize,
        min_coalitions: Vec<Vec<usize>>,
    },
}

impl AccessSpec {
    pub fn build(&self) -> Result<AccessStructure> {
        match self {
            AccessSpec::Threshold { n, k } => AccessStructure::threshold(*n, *k),
            AccessSpec::General { n, min_coalitions } => {
                AccessStructure::general_from_ids(*n, min_coalitions)
            }
        }
    }
}
