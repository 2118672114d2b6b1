//! Rules removing contextually unreasonable actions.

use crate::belief::BeliefState;
use crate::domain::{GeneralAction, InfoKind, SystemAction};

/// A real value at or above this probability makes requesting the slot pointless.
pub const REQUEST_MASK_THRESHOLD: f64 = 0.8;

/// Allowed actions; `true` means the action may be taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionMask {
    /// Slot-major, [`InfoKind::ALL`] order within a slot.
    pub info: Vec<bool>,
    /// [`GeneralAction::ALL`] order.
    pub general: [bool; 5],
}

impl ActionMask {
    pub fn all(num_slots: usize) -> Self {
        Self {
            info: vec![true; 3 * num_slots],
            general: [true; 5],
        }
    }

    pub fn info_allowed(&self, kind: InfoKind, slot: usize) -> bool {
        self.info[3 * slot + kind.index()]
    }

    pub fn any_info(&self) -> bool {
        self.info.iter().any(|&a| a)
    }

    pub fn general_allowed(&self, g: GeneralAction) -> bool {
        self.general[g.index()]
    }

    /// Whether a concrete action is allowed; pass never is.
    pub fn allows(&self, action: SystemAction) -> bool {
        match action {
            SystemAction::Info { kind, slot } => self.info_allowed(kind, slot),
            SystemAction::General(g) => self.general_allowed(g),
            SystemAction::Pass => false,
        }
    }
}

/// Applies the masking rules to a belief state. With `enabled == false`
/// everything is allowed.
pub fn apply_masks(belief: &BeliefState, enabled: bool) -> ActionMask {
    let n = belief.slots.len();
    if !enabled {
        return ActionMask::all(n);
    }
    let mut mask = ActionMask::all(n);
    for (s, dist) in belief.slots.iter().enumerate() {
        let unknown = dist.none_is_max();
        let real_candidates = dist.probs[..dist.num_values()]
            .iter()
            .filter(|&&p| p > 0.0)
            .count();
        mask.info[3 * s + InfoKind::Request.index()] = dist.top_real().1 < REQUEST_MASK_THRESHOLD;
        mask.info[3 * s + InfoKind::Confirm.index()] = !unknown;
        mask.info[3 * s + InfoKind::Select.index()] = !unknown && real_candidates >= 2;
    }
    let any_known = belief.slots.iter().any(|d| !d.none_is_max());
    let offered = belief.offered_entity.is_some();
    mask.general[GeneralAction::Inform.index()] = any_known;
    mask.general[GeneralAction::InformAlternatives.index()] = offered;
    mask.general[GeneralAction::Bye.index()] = offered;
    mask.general[GeneralAction::Repeat.index()] = false;
    mask
}
