//! Turning a finished episode into learner experience.

use super::acer::{AcerEpisode, AcerStep};
use super::dqn::SlotTransition;
use super::features::{belief_features, BeliefFeatures, FeatureLayout};
use super::masks::apply_masks;
use super::{
    Architecture, Variant, GENERAL_PASS, MASTER_GENERAL, MASTER_INFO, MERGED_INFO, SLOT_PASS,
};
use crate::belief::BeliefState;
use crate::dialogue::{Episode, SoftmaxChoice};
use crate::domain::{Domain, SystemAction};
use crate::error::{Error, Result};
use crate::reward::{information_gain, thresholded_gain, RewardConfig};

/// Experience extracted from one episode.
#[derive(Debug, Clone, Default)]
pub struct Transitions {
    pub slot: Vec<SlotTransition>,
    /// Merged master-general policy trajectory.
    pub merged: Option<AcerEpisode>,
    /// Master policy trajectory (baseline).
    pub master: Option<AcerEpisode>,
    /// General policy trajectory including forced passes (baseline).
    pub general: Option<AcerEpisode>,
}

struct TurnFeatures {
    before: BeliefFeatures,
    after: BeliefFeatures,
}

fn slot_next_mask(variant: &Variant, belief: &BeliefState, slot: usize, masks: bool) -> Vec<bool> {
    let m = apply_masks(belief, masks);
    let mut out = m.info[3 * slot..3 * slot + 3].to_vec();
    if variant.pass_tuples {
        out.push(true);
    }
    out
}

fn missing(turn: usize, what: &str) -> Error {
    Error::Mode(format!("turn {turn} has no {what} policy choice"))
}

fn chosen_step(choice: &SoftmaxChoice, features: &[f64], reward: f64) -> AcerStep {
    AcerStep {
        features: features.to_vec(),
        action: choice.action,
        behaviour: choice.behaviour.clone(),
        mask: choice.mask.clone(),
        reward,
        forced: false,
    }
}

/// Builds slot tuples and actor-critic trajectories for `variant`.
///
/// With intrinsic reward, every turn where the information policy acted
/// yields one tuple rewarded by thresholded information gain. Otherwise
/// tuples carry the extrinsic reward, and turns where the information policy
/// did not act yield a pass tuple per slot when `variant.pass_tuples` is set.
pub fn build_transitions(
    episode: &Episode,
    variant: &Variant,
    domain: &Domain,
    layout: &FeatureLayout,
    masks: bool,
    reward: &RewardConfig,
) -> Result<Transitions> {
    let n = episode.turns.len();
    let feats: Vec<TurnFeatures> = episode
        .turns
        .iter()
        .map(|t| TurnFeatures {
            before: belief_features(layout, &t.belief, domain),
            after: belief_features(layout, &t.next_belief, domain),
        })
        .collect();

    let mut out = Transitions::default();
    for (i, turn) in episode.turns.iter().enumerate() {
        let terminal = i + 1 == n;
        let f = &feats[i];
        match turn.action {
            SystemAction::Info { kind, slot } => {
                let r = if variant.intrinsic {
                    let gain =
                        information_gain(reward, &turn.belief, turn.action, &turn.next_belief)?;
                    thresholded_gain(gain, reward.delta)
                } else {
                    turn.reward
                };
                out.slot.push(SlotTransition {
                    slot,
                    features: f.before.slot_row(slot).to_vec(),
                    action: kind.index(),
                    reward: r,
                    next_features: f.after.slot_row(slot).to_vec(),
                    next_mask: slot_next_mask(variant, &turn.next_belief, slot, masks),
                    terminal,
                });
            }
            SystemAction::General(_) if variant.pass_tuples => {
                for slot in 0..layout.num_slots {
                    out.slot.push(SlotTransition {
                        slot,
                        features: f.before.slot_row(slot).to_vec(),
                        action: SLOT_PASS,
                        reward: turn.reward,
                        next_features: f.after.slot_row(slot).to_vec(),
                        next_mask: slot_next_mask(variant, &turn.next_belief, slot, masks),
                        terminal,
                    });
                }
            }
            SystemAction::General(_) => {}
            SystemAction::Pass => {
                return Err(Error::Mode(format!("turn {i} emitted a pass action")));
            }
        }
    }

    match variant.architecture {
        Architecture::Merged => {
            let mut ep = AcerEpisode::default();
            for (i, turn) in episode.turns.iter().enumerate() {
                let choice = turn
                    .trace
                    .merged
                    .as_ref()
                    .ok_or_else(|| missing(i, "merged"))?;
                debug_assert_eq!(choice.action == MERGED_INFO, turn.action.is_info());
                ep.steps
                    .push(chosen_step(choice, &feats[i].before.master, turn.reward));
            }
            out.merged = Some(ep);
        }
        Architecture::Feudal => {
            let mut master = AcerEpisode::default();
            let mut general = AcerEpisode::default();
            for (i, turn) in episode.turns.iter().enumerate() {
                let x = &feats[i].before.master;
                let m = turn
                    .trace
                    .master
                    .as_ref()
                    .ok_or_else(|| missing(i, "master"))?;
                master.steps.push(chosen_step(m, x, turn.reward));
                match (&turn.trace.general, m.action) {
                    (Some(g), MASTER_GENERAL) => general.steps.push(chosen_step(g, x, turn.reward)),
                    (None, MASTER_INFO) => {
                        let mut one_hot = vec![0.0; GENERAL_PASS + 1];
                        one_hot[GENERAL_PASS] = 1.0;
                        let mut mask = vec![false; GENERAL_PASS + 1];
                        mask[GENERAL_PASS] = true;
                        general.steps.push(AcerStep {
                            features: x.clone(),
                            action: GENERAL_PASS,
                            behaviour: one_hot,
                            mask,
                            reward: turn.reward,
                            forced: true,
                        });
                    }
                    _ => return Err(missing(i, "general")),
                }
            }
            out.master = Some(master);
            out.general = Some(general);
        }
    }
    Ok(out)
}
