use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::access::{AccessSpec, AccessStructure};
use crate::error::Error;
use crate::game::{StrategyProfile, UtilityModel, UtilitySpec};

/// Game description read by `analyze` and `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub access: AccessSpec,
    pub utilities: UtilitySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// A validated config.
#[derive(Debug, Clone)]
pub struct Game {
    pub access: AccessStructure,
    pub utilities: UtilityModel,
    pub profile: Option<StrategyProfile>,
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(#[from] Error),
}

impl GameConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn build(&self) -> Result<Game, ConfigError> {
        let access = self.access.build()?;
        let n = access.n();
        let utilities = self.utilities.build(n)?;
        let profile = match &self.profile {
            Some(alpha) => Some(parse_profile(alpha, n)?),
            None => None,
        };
        Ok(Game {
            access,
            utilities,
            profile,
            seed: self.seed,
        })
    }
}

pub fn parse_profile(alpha: &[f64], n: usize) -> Result<StrategyProfile, Error> {
    if alpha.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: alpha.len(),
        });
    }
    StrategyProfile::new(alpha.to_vec())
}
