use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dialogue::{DialogueConfig, DEFAULT_MAX_TURNS};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::feudal::{PolicyConfig, Variant};
use crate::reward::RewardConfig;
use crate::usersim::EnvProfile;

/// One experiment: an environment, a policy variant and a training protocol.
///
/// Read from TOML; every key is optional. Example:
///
/// ```toml
/// env = "env3"
/// domain = "cr"
/// mode = "feudalgain"
/// seeds = [0, 1, 2]
/// train_dialogues = 1000
/// output_dir = "runs/env3"
///
/// [policy.dqn]
/// hidden = [130, 50]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub env: String,
    /// Overrides the environment's semantic error rate.
    pub error_rate: Option<f64>,
    /// Turns action masks off regardless of the environment.
    pub no_masks: bool,
    pub domain: String,
    pub mode: String,
    pub no_pass: bool,
    pub no_ig: bool,
    pub train_dialogues: u64,
    pub eval_every: u64,
    pub eval_dialogues: u64,
    pub seeds: Vec<u64>,
    pub delta: f64,
    pub gamma: f64,
    pub lr_pi_i: f64,
    pub lr_pi_mg: f64,
    pub max_turns: usize,
    pub output_dir: PathBuf,
    /// Log π_i's replay loss every `loss_every` dialogues (0 disables).
    pub loss_every: u64,
    /// Re-run seeds whose metrics already exist.
    pub force: bool,
    pub policy: PolicyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: "env1".into(),
            error_rate: None,
            no_masks: false,
            domain: "cr".into(),
            mode: "feudalgain".into(),
            no_pass: false,
            no_ig: false,
            train_dialogues: 4000,
            eval_every: 200,
            eval_dialogues: 500,
            seeds: (0..10).collect(),
            delta: 0.2,
            gamma: 0.99,
            lr_pi_i: 1e-3,
            lr_pi_mg: 5e-4,
            max_turns: DEFAULT_MAX_TURNS,
            output_dir: PathBuf::from("runs"),
            loss_every: 1,
            force: false,
            policy: PolicyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.env_profile()?;
        self.load_domain()?;
        self.variant()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.eval_every == 0 || !self.train_dialogues.is_multiple_of(self.eval_every) {
            return Err(Error::Config(format!(
                "eval_every ({}) must divide train_dialogues ({})",
                self.eval_every, self.train_dialogues
            )));
        }
        if self.max_turns == 0 {
            return Err(Error::Config("max_turns must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!(
                "gamma {} outside [0, 1]",
                self.gamma
            )));
        }
        if self.lr_pi_i <= 0.0 || self.lr_pi_mg <= 0.0 {
            return Err(Error::Config("learning rates must be positive".into()));
        }
        self.reward().validate()
    }

    pub fn env_profile(&self) -> Result<EnvProfile> {
        let mut env: EnvProfile = self.env.parse()?;
        if let Some(rate) = self.error_rate {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config(format!("error rate {rate} outside [0, 1]")));
            }
            env = env.with_error_rate(rate);
        }
        if self.no_masks {
            env.action_masks = false;
        }
        Ok(env)
    }

    pub fn load_domain(&self) -> Result<Domain> {
        Domain::by_name(&self.domain).ok_or_else(|| {
            Error::Config(format!(
                "unknown domain {:?} (expected cr or sfr)",
                self.domain
            ))
        })
    }

    pub fn variant(&self) -> Result<Variant> {
        let mut v: Variant = self.mode.parse()?;
        if self.no_ig {
            v = v.without_ig();
        }
        if self.no_pass {
            v = v.without_pass();
        }
        v.validate()?;
        Ok(v)
    }

    pub fn reward(&self) -> RewardConfig {
        RewardConfig {
            delta: self.delta,
            ..self.policy.reward
        }
    }

    /// Policy hyperparameters with the top-level overrides applied.
    pub fn policy_config(&self) -> PolicyConfig {
        let mut p = self.policy.clone();
        p.dqn.gamma = self.gamma;
        p.acer.gamma = self.gamma;
        p.dqn.learning_rate = self.lr_pi_i;
        p.acer.learning_rate = self.lr_pi_mg;
        p.max_turns = self.max_turns;
        p.reward = self.reward();
        if p.epsilon_dialogues == PolicyConfig::default().epsilon_dialogues {
            p.epsilon_dialogues = self.train_dialogues;
        }
        p
    }

    pub fn dialogue_config(&self) -> DialogueConfig {
        DialogueConfig {
            max_turns: self.max_turns,
            reward: self.reward(),
        }
    }

    /// Dialogue counts at which the policy is evaluated.
    pub fn checkpoints(&self) -> Vec<u64> {
        (1..=self.train_dialogues / self.eval_every)
            .map(|k| k * self.eval_every)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_protocol() {
        let c = ExperimentConfig::default();
        assert_eq!(c.checkpoints().len(), 20);
        assert_eq!(c.variant().unwrap(), Variant::FEUDALGAIN);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn toml_overrides() {
        let c = ExperimentConfig::from_toml_str(
            "env = \"env3\"\nmode = \"feudal-nn\"\nno_pass = true\ntrain_dialogues = 400\nseeds = [4]\n[policy.dqn]\nhidden = [8]\n",
        )
        .unwrap();
        assert_eq!(c.checkpoints(), vec![200, 400]);
        assert_eq!(c.variant().unwrap(), Variant::FEUDAL_NN.without_pass());
        assert_eq!(c.env_profile().unwrap().semantic_error_rate, 0.15);
        assert_eq!(c.policy.dqn.hidden, vec![8]);
        assert_eq!(c.policy.dqn.batch_size, 64);
        let back = ExperimentConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_bad_configs() {
        for src in [
            "seeds = []",
            "train_dialogues = 300",
            "env = \"env9\"",
            "mode = \"nope\"",
            "domain = \"laptops\"",
            "unknown_key = 1",
            "error_rate = 1.5",
        ] {
            assert!(ExperimentConfig::from_toml_str(src).is_err(), "{src}");
        }
    }
}
