use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UserProfileKind {
    Standard,
    Unfriendly,
}

/// Behavioural knobs of the simulated user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserBehaviour {
    /// Probability of volunteering each not-yet-conveyed constraint.
    pub volunteer_prob: f64,
    /// Maximum number of constraints volunteered per turn.
    pub max_volunteered: usize,
    /// Probability of answering with a null act, even when asked.
    pub null_prob: f64,
}

impl UserBehaviour {
    pub fn for_profile(kind: UserProfileKind) -> Self {
        match kind {
            UserProfileKind::Standard => Self {
                volunteer_prob: 0.3,
                max_volunteered: 2,
                null_prob: 0.0,
            },
            UserProfileKind::Unfriendly => Self {
                volunteer_prob: 0.0,
                max_volunteered: 0,
                null_prob: 0.3,
            },
        }
    }
}

/// One of the six benchmark environment settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvProfile {
    pub id: u8,
    pub semantic_error_rate: f64,
    pub action_masks: bool,
    pub user_profile: UserProfileKind,
}

impl EnvProfile {
    pub fn new(id: u8) -> Result<Self> {
        use UserProfileKind::*;
        let (semantic_error_rate, action_masks, user_profile) = match id {
            1 => (0.0, true, Standard),
            2 => (0.0, false, Standard),
            3 => (0.15, true, Standard),
            4 => (0.15, false, Standard),
            5 => (0.15, true, Unfriendly),
            6 => (0.30, true, Standard),
            _ => {
                return Err(Error::Config(format!(
                    "unknown environment env{id}; expected env1..env6"
                )))
            }
        };
        Ok(Self {
            id,
            semantic_error_rate,
            action_masks,
            user_profile,
        })
    }

    pub fn all() -> Vec<Self> {
        (1..=6).map(|i| Self::new(i).unwrap()).collect()
    }

    pub fn with_error_rate(mut self, rate: f64) -> Self {
        self.semantic_error_rate = rate;
        self
    }

    pub fn behaviour(&self) -> UserBehaviour {
        UserBehaviour::for_profile(self.user_profile)
    }
}

impl fmt::Display for EnvProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "env{}", self.id)
    }
}

impl FromStr for EnvProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s.trim().to_ascii_lowercase();
        let digits = digits.strip_prefix("env").unwrap_or(&digits);
        let id: u8 = digits
            .parse()
            .map_err(|_| Error::Config(format!("cannot parse environment `{s}`")))?;
        Self::new(id)
    }
}
