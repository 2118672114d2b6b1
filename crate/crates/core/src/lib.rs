//! Hierarchical (feudal) dialogue policies trained with an information-gain
//! intrinsic reward.
//!
//! The crate is organised bottom-up:
//!
//! - [`domain`]: ontology, entity database, semantic acts and system action spaces
//! - [`belief`]: the focus belief tracker
//! - [`usersim`]: agenda-based simulated user, semantic error channel and the
//!   six benchmark environment profiles
//! - [`dialogue`]: the user/system loop that produces [`dialogue::Episode`]s
//! - [`reward`]: extrinsic reward, Jensen-Shannon information gain and its
//!   thresholded form
//! - [`neural`]: small feed-forward networks with noisy layers, dueling heads
//!   and an Adam optimiser
//! - [`feudal`]: the feudal policy set, action masks and the DDQN/ACER learners
//! - [`harness`]: training, evaluation, ablations, noise sweeps and metrics I/O

pub mod belief;
pub mod dialogue;
pub mod domain;
pub mod error;
pub mod feudal;
pub mod harness;
pub mod neural;
pub mod reward;
pub mod rng;
pub mod usersim;

pub use belief::{BeliefState, SlotDistribution, TurnEvidence};
pub use dialogue::{run_dialogue, run_dialogue_with_goal, DialoguePolicy, Episode};
pub use domain::{
    ActType, DialogueAct, Domain, EntityDatabase, Ontology, SystemAction, SystemActionSpace,
};
pub use error::{Error, Result};
pub use feudal::{PolicySet, Variant};
pub use reward::RewardConfig;
pub use usersim::{EnvProfile, UserGoal};
