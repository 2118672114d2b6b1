//! JSON policy checkpoints.
//!
//! A checkpoint is one JSON object tagged by `kind`:
//! `learned` (network parameters and the configuration they were trained
//! with), or the pseudo-checkpoints `scripted_oracle` and `always_bye`.
//! Learned checkpoints carry `format_version` and the ontology name.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::policy::{PolicyConfig, PolicySet};
use super::Variant;
use crate::dialogue::{AlwaysBye, DialoguePolicy, ScriptedOracle};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::neural::Network;

pub const CHECKPOINT_FORMAT: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnedPolicy {
    pub format_version: u32,
    /// Ontology name the policy was trained on.
    pub domain: String,
    pub variant: Variant,
    pub config: PolicyConfig,
    pub dialogues: u64,
    pub pi_i: Network,
    pub merged: Option<Network>,
    pub master: Option<Network>,
    pub general: Option<Network>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Checkpoint {
    Learned(Box<LearnedPolicy>),
    ScriptedOracle,
    AlwaysBye,
}

impl Checkpoint {
    pub fn from_json_str(src: &str) -> Result<Self> {
        let cp: Checkpoint = serde_json::from_str(src).map_err(|e| Error::Parse {
            what: "checkpoint".into(),
            msg: e.to_string(),
        })?;
        if let Checkpoint::Learned(p) = &cp {
            if p.format_version != CHECKPOINT_FORMAT {
                return Err(Error::Checkpoint(format!(
                    "unsupported checkpoint format {} (expected {CHECKPOINT_FORMAT})",
                    p.format_version
                )));
            }
        }
        Ok(cp)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&src)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialises")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    /// Human-readable policy name.
    pub fn label(&self) -> String {
        match self {
            Checkpoint::Learned(p) => p.variant.label(),
            Checkpoint::ScriptedOracle => "scripted-oracle".into(),
            Checkpoint::AlwaysBye => "always-bye".into(),
        }
    }

    /// Instantiates a policy for `domain`.
    pub fn to_policy(&self, domain: &Domain) -> Result<Box<dyn DialoguePolicy + Send>> {
        Ok(match self {
            Checkpoint::Learned(p) => Box::new(PolicySet::from_snapshot((**p).clone(), domain)?),
            Checkpoint::ScriptedOracle => Box::new(ScriptedOracle),
            Checkpoint::AlwaysBye => Box::new(AlwaysBye),
        })
    }
}

impl From<&PolicySet> for Checkpoint {
    fn from(p: &PolicySet) -> Self {
        Checkpoint::Learned(Box::new(p.snapshot()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    #[test]
    fn save_and_load() {
        let d = Domain::cambridge_restaurants();
        let mut cfg = PolicyConfig::default();
        cfg.dqn.hidden = vec![8];
        cfg.acer.hidden = vec![8];
        let p = PolicySet::new(Variant::FEUDALGAIN, cfg, &d, &mut from_seed(1)).unwrap();
        let cp = Checkpoint::from(&p);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/policy.json");
        cp.save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), cp);
        assert!(cp.to_policy(&d).is_ok());
        assert!(cp.to_policy(&Domain::sf_restaurants()).is_err());
    }

    #[test]
    fn pseudo_checkpoints_parse() {
        assert_eq!(
            Checkpoint::from_json_str(r#"{"kind": "always_bye"}"#).unwrap(),
            Checkpoint::AlwaysBye
        );
        assert_eq!(
            Checkpoint::from_json_str(r#"{"kind": "scripted_oracle"}"#)
                .unwrap()
                .label(),
            "scripted-oracle"
        );
        assert!(Checkpoint::from_json_str(r#"{"kind": "mystery"}"#).is_err());
    }

    #[test]
    fn rejects_other_format_versions() {
        let d = Domain::cambridge_restaurants();
        let mut cfg = PolicyConfig::default();
        cfg.dqn.hidden = vec![4];
        cfg.acer.hidden = vec![4];
        let p = PolicySet::new(Variant::FEUDAL, cfg, &d, &mut from_seed(1)).unwrap();
        let mut snap = p.snapshot();
        snap.format_version = 99;
        let json = Checkpoint::Learned(Box::new(snap)).to_json_string();
        assert!(matches!(
            Checkpoint::from_json_str(&json),
            Err(Error::Checkpoint(_))
        ));
    }
}
