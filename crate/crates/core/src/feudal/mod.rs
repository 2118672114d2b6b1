//! Feudal dialogue policies.
//!
//! The information policy π_i is a slot-shared dueling double-DQN scoring
//! request, confirm and select for every slot. General actions come either
//! from a merged actor-critic π_mg over A_g ∪ {a_i}, or, in the baseline
//! architecture, from a master π_m choosing between π_i and a general policy
//! π_g that passes whenever π_i acts.

mod acer;
mod checkpoint;
mod dqn;
mod features;
mod masks;
mod policy;
mod replay;
mod transitions;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use acer::{
    masked_softmax, retrace_targets, truncated_weight, AcerConfig, AcerEpisode, AcerLearner,
    AcerStep, MIN_BEHAVIOUR_PROB,
};
pub use checkpoint::{Checkpoint, LearnedPolicy, CHECKPOINT_FORMAT};
pub use dqn::{double_dqn_target, DqnConfig, DqnLearner, SlotTransition};
pub use features::{belief_features, BeliefFeatures, FeatureLayout, SLOT_ACTION_BITS, SLOT_BLOCK};
pub use masks::{apply_masks, ActionMask, REQUEST_MASK_THRESHOLD};
pub use policy::{LearnStats, PolicyConfig, PolicySet};
pub use replay::ReplayBuffer;
pub use transitions::{build_transitions, Transitions};

use crate::error::{Error, Result};

/// Index of a_i in the merged action list (after the five general actions).
pub const MERGED_INFO: usize = 5;
/// Master action indices.
pub const MASTER_INFO: usize = 0;
pub const MASTER_GENERAL: usize = 1;
/// Index of pass in the baseline general policy's outputs.
pub const GENERAL_PASS: usize = 5;
/// Index of pass in the slot policy's outputs when pass tuples are used.
pub const SLOT_PASS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    /// π_mg over A_g ∪ {a_i} plus π_i.
    Merged,
    /// π_m over {a_i, a_g}, π_g over A_g ∪ {pass}, plus π_i.
    Feudal,
}

/// Which parts of the method are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variant {
    pub architecture: Architecture,
    /// Noisy networks for exploration; otherwise ε-greedy for π_i.
    pub noisy: bool,
    /// Train π_i on thresholded information gain instead of r_e.
    pub intrinsic: bool,
    /// Train π_i on pass tuples for turns where it did not act.
    pub pass_tuples: bool,
}

impl Variant {
    pub const FEUDALGAIN: Variant = Variant {
        architecture: Architecture::Merged,
        noisy: true,
        intrinsic: true,
        pass_tuples: false,
    };
    pub const FEUDAL: Variant = Variant {
        architecture: Architecture::Feudal,
        noisy: false,
        intrinsic: false,
        pass_tuples: true,
    };
    pub const FEUDAL_NN: Variant = Variant {
        architecture: Architecture::Feudal,
        noisy: true,
        intrinsic: false,
        pass_tuples: true,
    };
    pub const FEUDAL_NN_IG: Variant = Variant {
        architecture: Architecture::Feudal,
        noisy: true,
        intrinsic: true,
        pass_tuples: false,
    };

    pub fn without_pass(self) -> Self {
        Self {
            pass_tuples: false,
            ..self
        }
    }

    /// Extrinsic reward for π_i, which then needs pass tuples.
    pub fn without_ig(self) -> Self {
        Self {
            intrinsic: false,
            pass_tuples: true,
            ..self
        }
    }

    pub fn without_noise(self) -> Self {
        Self {
            noisy: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.intrinsic && self.pass_tuples {
            return Err(Error::Mode(
                "information gain is only defined for information-seeking actions; pass tuples cannot use it".into(),
            ));
        }
        Ok(())
    }

    /// Number of slot policy outputs.
    pub fn slot_actions(&self) -> usize {
        if self.pass_tuples {
            4
        } else {
            3
        }
    }

    /// Short label, e.g. `feudalgain` or `feudal-nn-nopass`.
    pub fn label(&self) -> String {
        let named = [
            (Variant::FEUDALGAIN, "feudalgain"),
            (Variant::FEUDAL, "feudal"),
            (Variant::FEUDAL_NN, "feudal-nn"),
            (Variant::FEUDAL_NN_IG, "feudal-nn-ig"),
        ];
        if let Some((_, name)) = named.iter().find(|(v, _)| v == self) {
            return name.to_string();
        }
        let mut s = match self.architecture {
            Architecture::Merged => "merged".to_string(),
            Architecture::Feudal => "feudal".to_string(),
        };
        if self.noisy {
            s.push_str("-nn");
        }
        if self.intrinsic {
            s.push_str("-ig");
        } else if !self.pass_tuples {
            s.push_str("-nopass");
        }
        s
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feudalgain" => Ok(Variant::FEUDALGAIN),
            "feudal" => Ok(Variant::FEUDAL),
            "feudal-nn" => Ok(Variant::FEUDAL_NN),
            "feudal-nn-ig" => Ok(Variant::FEUDAL_NN_IG),
            "feudal-nopass" => Ok(Variant::FEUDAL.without_pass()),
            "feudal-nn-nopass" => Ok(Variant::FEUDAL_NN.without_pass()),
            "merged-nn" => Ok(Variant::FEUDALGAIN.without_ig()),
            other => Err(Error::Mode(format!(
                "unknown mode {other:?} (expected feudalgain, feudal, feudal-nn or feudal-nn-ig)"
            ))),
        }
    }
}

/// Draws an index from a probability vector.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Index of the largest allowed value; ties go to the earliest index.
pub fn masked_argmax(values: &[f64], mask: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if mask.get(i).copied().unwrap_or(true) && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::from_seed;

    #[test]
    fn labels_round_trip() {
        for v in [
            Variant::FEUDALGAIN,
            Variant::FEUDAL,
            Variant::FEUDAL_NN,
            Variant::FEUDAL_NN_IG,
            Variant::FEUDAL_NN.without_pass(),
            Variant::FEUDALGAIN.without_ig(),
        ] {
            assert_eq!(v.label().parse::<Variant>().unwrap(), v, "{}", v.label());
        }
        assert!("bogus".parse::<Variant>().is_err());
    }

    #[test]
    fn intrinsic_pass_is_rejected() {
        let bad = Variant {
            pass_tuples: true,
            ..Variant::FEUDALGAIN
        };
        assert!(bad.validate().is_err());
        assert!(Variant::FEUDALGAIN.without_ig().validate().is_ok());
    }

    #[test]
    fn sampling_follows_probabilities() {
        let mut rng = from_seed(4);
        let p = [0.2, 0.0, 0.8];
        let mut counts = [0; 3];
        for _ in 0..10_000 {
            counts[sample_index(&p, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 10_000.0 - 0.2).abs() < 0.02);
    }

    #[test]
    fn argmax_respects_mask() {
        assert_eq!(
            masked_argmax(&[3.0, 5.0, 4.0], &[true, false, true]),
            Some(2)
        );
        assert_eq!(masked_argmax(&[1.0, 1.0], &[true, true]), Some(0));
        assert_eq!(masked_argmax(&[1.0], &[false]), None);
    }
}
