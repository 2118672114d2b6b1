use std::fmt;

use serde::{Deserialize, Serialize};

use super::ontology::Ontology;

/// Information-seeking action kinds; together with a slot they form A_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoKind {
    Request,
    Confirm,
    Select,
}

impl InfoKind {
    pub const ALL: [InfoKind; 3] = [InfoKind::Request, InfoKind::Confirm, InfoKind::Select];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// The general actions A_g.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneralAction {
    Inform,
    InformAlternatives,
    Reqmore,
    Bye,
    Repeat,
}

impl GeneralAction {
    pub const ALL: [GeneralAction; 5] = [
        GeneralAction::Inform,
        GeneralAction::InformAlternatives,
        GeneralAction::Reqmore,
        GeneralAction::Bye,
        GeneralAction::Repeat,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A concrete system action id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemAction {
    Info { kind: InfoKind, slot: usize },
    General(GeneralAction),
    Pass,
}

impl SystemAction {
    /// Number of distinct action kinds, used for one-hot features.
    pub const NUM_KINDS: usize = 9;

    pub fn kind_index(&self) -> usize {
        match self {
            SystemAction::Info { kind, .. } => kind.index(),
            SystemAction::General(g) => 3 + g.index(),
            SystemAction::Pass => 8,
        }
    }

    pub fn slot(&self) -> Option<usize> {
        match self {
            SystemAction::Info { slot, .. } => Some(*slot),
            _ => None,
        }
    }

    pub fn is_info(&self) -> bool {
        matches!(self, SystemAction::Info { .. })
    }

    pub fn label(&self, ontology: &Ontology) -> String {
        match self {
            SystemAction::Info { kind, slot } => {
                format!("{:?}-{}", kind, ontology.slot(*slot).name).to_lowercase()
            }
            SystemAction::General(g) => format!("{g:?}").to_lowercase(),
            SystemAction::Pass => "pass".into(),
        }
    }
}

impl fmt::Display for SystemAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemAction::Info { kind, slot } => write!(f, "{kind:?}(slot {slot})"),
            SystemAction::General(g) => write!(f, "{g:?}"),
            SystemAction::Pass => f.write_str("Pass"),
        }
    }
}

/// A_m: the master policy's choice between the two sub-policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MasterAction {
    Info,
    General,
}

/// Actions of the merged master-general policy: A_g plus a_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergedAction {
    General(GeneralAction),
    Info,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSpaceMode {
    FeudalBaseline,
    FeudalGain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemActionSpace {
    pub mode: ActionSpaceMode,
    /// A_i, slot-major: request, confirm, select for each slot (then pass in
    /// baseline mode).
    pub info_actions: Vec<SystemAction>,
    /// A_g in [`GeneralAction::ALL`] order (then pass in baseline mode).
    pub general_actions: Vec<SystemAction>,
    pub master_actions: Vec<MasterAction>,
    /// A_g ∪ {a_i}; empty in baseline mode.
    pub merged_actions: Vec<MergedAction>,
}

pub fn enumerate_actions(ontology: &Ontology, mode: ActionSpaceMode) -> SystemActionSpace {
    let mut info_actions: Vec<SystemAction> = (0..ontology.num_slots())
        .flat_map(|slot| {
            InfoKind::ALL
                .iter()
                .map(move |&kind| SystemAction::Info { kind, slot })
        })
        .collect();
    let mut general_actions: Vec<SystemAction> = GeneralAction::ALL
        .iter()
        .map(|&g| SystemAction::General(g))
        .collect();
    let merged_actions = match mode {
        ActionSpaceMode::FeudalBaseline => {
            info_actions.push(SystemAction::Pass);
            general_actions.push(SystemAction::Pass);
            Vec::new()
        }
        ActionSpaceMode::FeudalGain => GeneralAction::ALL
            .iter()
            .map(|&g| MergedAction::General(g))
            .chain(std::iter::once(MergedAction::Info))
            .collect(),
    };
    SystemActionSpace {
        mode,
        info_actions,
        general_actions,
        master_actions: vec![MasterAction::Info, MasterAction::General],
        merged_actions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    #[test]
    fn feudalgain_counts() {
        let o = Domain::cambridge_restaurants().ontology;
        let space = enumerate_actions(&o, ActionSpaceMode::FeudalGain);
        // Hand enumeration: {request, confirm, select} x {pricerange, area, food}.
        assert_eq!(space.info_actions.len(), 9);
        assert_eq!(space.merged_actions.len(), 6);
        assert_eq!(space.general_actions.len(), 5);
        assert!(!space.info_actions.contains(&SystemAction::Pass));
        assert!(space
            .info_actions
            .iter()
            .all(|a| !space.general_actions.contains(a)));
    }

    #[test]
    fn baseline_adds_pass_to_both() {
        let o = Domain::cambridge_restaurants().ontology;
        let space = enumerate_actions(&o, ActionSpaceMode::FeudalBaseline);
        assert_eq!(space.info_actions.len(), 10);
        assert_eq!(space.general_actions.len(), 6);
        assert_eq!(space.info_actions.last(), Some(&SystemAction::Pass));
        assert_eq!(space.general_actions.last(), Some(&SystemAction::Pass));
        assert!(space.merged_actions.is_empty());
    }

    #[test]
    fn enumeration_is_pure() {
        let o = Domain::sf_restaurants().ontology;
        for mode in [ActionSpaceMode::FeudalGain, ActionSpaceMode::FeudalBaseline] {
            assert_eq!(enumerate_actions(&o, mode), enumerate_actions(&o, mode));
        }
        assert_eq!(
            enumerate_actions(&o, ActionSpaceMode::FeudalGain)
                .info_actions
                .len(),
            18
        );
    }
}
