//! The user/system turn loop.

mod render;
mod scripted;

use serde::{Deserialize, Serialize};

pub use render::render_system_act;
pub use scripted::{AlwaysBye, ScriptedOracle};

use crate::belief::{evidence_from_act, focus_update, initial_belief, BeliefState};
use crate::domain::{DialogueAct, Domain, GeneralAction, SystemAction};
use crate::error::Result;
use crate::reward::RewardConfig;
use crate::rng::DialogueRng;
use crate::usersim::{corrupt, sample_goal, Corruption, EnvProfile, SimulatedUser, UserGoal};

pub const DEFAULT_MAX_TURNS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Stochastic selection with exploration noise.
    Train,
    /// Greedy selection with mean weights.
    Eval,
}

/// A softmax choice made by an actor-critic policy, with what is needed to
/// replay it off-policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxChoice {
    pub action: usize,
    /// Behaviour distribution over the policy's whole action set.
    pub behaviour: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Which sub-policies acted in a turn.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PolicyTrace {
    /// Merged master-general policy choice.
    pub merged: Option<SoftmaxChoice>,
    /// Master policy choice between the two sub-policies.
    pub master: Option<SoftmaxChoice>,
    /// General policy choice; `None` in a baseline turn means it passed.
    pub general: Option<SoftmaxChoice>,
    /// True when the information policy produced the action.
    pub info_acted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: SystemAction,
    pub trace: PolicyTrace,
}

impl Decision {
    pub fn plain(action: SystemAction) -> Self {
        Self {
            action,
            trace: PolicyTrace {
                info_acted: action.is_info(),
                ..Default::default()
            },
        }
    }
}

/// Anything that maps a belief state to a system action.
pub trait DialoguePolicy {
    fn decide(
        &mut self,
        belief: &BeliefState,
        domain: &Domain,
        masks: bool,
        mode: SelectionMode,
        rng: &mut DialogueRng,
    ) -> Decision;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    SystemBye,
    UserBye,
    PatienceExhausted,
    MaxTurns,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub belief: BeliefState,
    pub action: SystemAction,
    pub system_act: DialogueAct,
    pub trace: PolicyTrace,
    pub user_act: Option<DialogueAct>,
    pub observed_act: Option<DialogueAct>,
    pub corruption: Option<Corruption>,
    /// Extrinsic reward of this turn.
    pub reward: f64,
    pub next_belief: BeliefState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub goal: UserGoal,
    pub opening: DialogueAct,
    pub turns: Vec<TurnRecord>,
    pub success: bool,
    pub end: EndReason,
}

impl Episode {
    pub fn total_reward(&self) -> f64 {
        self.turns.iter().map(|t| t.reward).sum()
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Deterministic JSON trace, one line.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("episode serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DialogueConfig {
    pub max_turns: usize,
    pub reward: RewardConfig,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        Self {
            max_turns: DEFAULT_MAX_TURNS,
            reward: RewardConfig::default(),
        }
    }
}

/// Samples a goal from `rng` and runs one dialogue, using `rng` for every
/// random choice.
pub fn run_dialogue(
    policy: &mut dyn DialoguePolicy,
    env: &EnvProfile,
    domain: &Domain,
    rng: &mut DialogueRng,
    cfg: &DialogueConfig,
    mode: SelectionMode,
) -> Result<Episode> {
    let goal = sample_goal(&domain.ontology, &domain.db, rng);
    let mut policy_rng = crate::rng::from_seed(rand::Rng::random(rng));
    run_dialogue_with_goal(policy, env, domain, goal, rng, &mut policy_rng, cfg, mode)
}

/// Runs one dialogue for a given goal. User behaviour and the error channel
/// draw from `user_rng`; the policy draws from `policy_rng`.
#[allow(clippy::too_many_arguments)]
pub fn run_dialogue_with_goal(
    policy: &mut dyn DialoguePolicy,
    env: &EnvProfile,
    domain: &Domain,
    goal: UserGoal,
    user_rng: &mut DialogueRng,
    policy_rng: &mut DialogueRng,
    cfg: &DialogueConfig,
    mode: SelectionMode,
) -> Result<Episode> {
    let ontology = &domain.ontology;
    let error_rate = env.semantic_error_rate;
    let mut user = SimulatedUser::new(goal.clone(), env.behaviour());
    let opening = user.opening_act(user_rng);
    let (observed, _) = corrupt(&opening, error_rate, ontology, user_rng);
    let mut belief = focus_update(
        ontology,
        &initial_belief(ontology),
        &evidence_from_act(ontology, &observed, None),
    )?;

    let mut turns = Vec::with_capacity(cfg.max_turns);
    let mut end = EndReason::MaxTurns;
    let mut success = false;
    for t in 0..cfg.max_turns {
        let decision = policy.decide(&belief, domain, env.action_masks, mode, policy_rng);
        let (system_act, offered) = render_system_act(decision.action, &belief, domain);
        let mut next = belief.clone();
        next.record_system_action(decision.action, offered);

        if decision.action == SystemAction::General(GeneralAction::Bye) {
            success = dialogue_succeeded(&next, &user, domain);
            turns.push(TurnRecord {
                belief,
                action: decision.action,
                system_act,
                trace: decision.trace,
                user_act: None,
                observed_act: None,
                corruption: None,
                reward: cfg.reward.extrinsic(true, success),
                next_belief: next,
            });
            end = EndReason::SystemBye;
            break;
        }

        let user_act = user.respond(&system_act, &domain.db, user_rng);
        let (observed, corruption) = corrupt(&user_act, error_rate, ontology, user_rng);
        let evidence = evidence_from_act(ontology, &observed, Some(&system_act));
        let next = focus_update(ontology, &next, &evidence)?;

        let user_bye = user_act.act_type == crate::domain::ActType::Bye;
        let last = t + 1 == cfg.max_turns;
        let ended = user_bye || last;
        if ended {
            success = user_bye && !user.gave_up() && dialogue_succeeded(&next, &user, domain);
            end = if user.gave_up() {
                EndReason::PatienceExhausted
            } else if user_bye {
                EndReason::UserBye
            } else {
                EndReason::MaxTurns
            };
        }
        turns.push(TurnRecord {
            belief,
            action: decision.action,
            system_act,
            trace: decision.trace,
            user_act: Some(user_act),
            observed_act: Some(observed),
            corruption: Some(corruption),
            reward: cfg.reward.extrinsic(ended, success),
            next_belief: next.clone(),
        });
        if ended {
            break;
        }
        belief = next;
    }
    Ok(Episode {
        goal,
        opening,
        turns,
        success,
        end,
    })
}

/// The offered entity satisfies every constraint and the user was told
/// everything it asked for about that entity.
fn dialogue_succeeded(belief: &BeliefState, user: &SimulatedUser, domain: &Domain) -> bool {
    let Some(name) = belief.offered_entity.as_deref() else {
        return false;
    };
    let Some(entity) = domain.db.by_name(name) else {
        return false;
    };
    entity.satisfies(user.goal.constraint_pairs())
        && user.accepted_entity() == Some(name)
        && user.requests_satisfied()
}
