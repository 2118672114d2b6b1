//! Agenda-based user simulation at the semantic-act level.

mod agenda;
mod channel;
mod env;
mod goal;
mod user;

pub use agenda::{Agenda, AgendaItem};
pub use channel::{corrupt, Corruption};
pub use env::{EnvProfile, UserBehaviour, UserProfileKind};
pub use goal::{sample_goal, UserGoal};
pub use user::SimulatedUser;
