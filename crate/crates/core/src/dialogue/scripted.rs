use super::{Decision, DialoguePolicy, SelectionMode};
use crate::belief::BeliefState;
use crate::domain::{Domain, GeneralAction, InfoKind, SystemAction};
use crate::rng::DialogueRng;

const CONFIDENT: f64 = 0.8;

/// Hand-written reference policy: request every unknown slot, confirm
/// uncertain ones, then offer and answer until the user leaves.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScriptedOracle;

impl DialoguePolicy for ScriptedOracle {
    fn decide(
        &mut self,
        belief: &BeliefState,
        _domain: &Domain,
        _masks: bool,
        _mode: SelectionMode,
        _rng: &mut DialogueRng,
    ) -> Decision {
        if belief.offered_entity.is_some() && !belief.requested.is_empty() {
            return Decision::plain(SystemAction::General(GeneralAction::Inform));
        }
        for (slot, dist) in belief.slots.iter().enumerate() {
            if dist.none_is_max() {
                return Decision::plain(SystemAction::Info {
                    kind: InfoKind::Request,
                    slot,
                });
            }
            if dist.top_informative().1 < CONFIDENT {
                return Decision::plain(SystemAction::Info {
                    kind: InfoKind::Confirm,
                    slot,
                });
            }
        }
        Decision::plain(SystemAction::General(GeneralAction::Inform))
    }
}

/// Ends every dialogue on the first turn.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysBye;

impl DialoguePolicy for AlwaysBye {
    fn decide(
        &mut self,
        _: &BeliefState,
        _: &Domain,
        _: bool,
        _: SelectionMode,
        _: &mut DialogueRng,
    ) -> Decision {
        Decision::plain(SystemAction::General(GeneralAction::Bye))
    }
}
