use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agenda::Agenda;
use super::env::UserBehaviour;
use super::goal::UserGoal;
use crate::domain::{ActItem, ActType, DialogueAct, EntityDatabase, ENTITY_NAME};

/// Agenda-based simulated user for one dialogue.
///
/// The user tracks which constraints it has conveyed, which slots it has
/// confirmed, which entity it has accepted and which of its requests were
/// answered for that entity. A turn counts as progress when any of those
/// grows; `patience` consecutive turns without progress end the dialogue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulatedUser {
    pub goal: UserGoal,
    pub agenda: Agenda,
    behaviour: UserBehaviour,
    conveyed: BTreeSet<String>,
    confirmed: BTreeSet<String>,
    answered: BTreeSet<String>,
    accepted: Option<String>,
    no_progress: u32,
    last_act: Option<DialogueAct>,
    gave_up: bool,
}

impl SimulatedUser {
    pub fn new(goal: UserGoal, behaviour: UserBehaviour) -> Self {
        Self {
            agenda: Agenda::new(&goal),
            goal,
            behaviour,
            conveyed: BTreeSet::new(),
            confirmed: BTreeSet::new(),
            answered: BTreeSet::new(),
            accepted: None,
            no_progress: 0,
            last_act: None,
            gave_up: false,
        }
    }

    /// True once every request has been answered for an accepted entity.
    pub fn requests_satisfied(&self) -> bool {
        self.accepted.is_some() && self.goal.requests.iter().all(|r| self.answered.contains(r))
    }

    pub fn gave_up(&self) -> bool {
        self.gave_up
    }

    pub fn accepted_entity(&self) -> Option<&str> {
        self.accepted.as_deref()
    }

    /// Opening utterance: a greeting, possibly volunteering constraints.
    pub fn opening_act<R: Rng + ?Sized>(&mut self, rng: &mut R) -> DialogueAct {
        let mut act = DialogueAct::bare(ActType::Hello);
        self.volunteer(&mut act, rng);
        self.last_act = Some(act.clone());
        act
    }

    /// The true (uncorrupted) user reply to a system act.
    pub fn respond<R: Rng + ?Sized>(
        &mut self,
        system: &DialogueAct,
        db: &EntityDatabase,
        rng: &mut R,
    ) -> DialogueAct {
        if system.act_type == ActType::Bye {
            let act = DialogueAct::bare(ActType::Bye);
            self.last_act = Some(act.clone());
            return act;
        }
        let silent = self.behaviour.null_prob > 0.0 && rng.random_bool(self.behaviour.null_prob);
        let (mut act, mut progress) = if silent {
            (DialogueAct::null(), false)
        } else {
            self.reply(system, db)
        };
        let repeated = matches!(system.act_type, ActType::Repeat | ActType::Reqmore);
        if !silent && !repeated && act.act_type == ActType::Inform {
            progress |= self.volunteer(&mut act, rng);
        }
        if progress {
            self.no_progress = 0;
        } else {
            self.no_progress += 1;
        }
        if act.act_type != ActType::Bye && self.no_progress >= self.goal.patience {
            self.gave_up = true;
            act = DialogueAct::bare(ActType::Bye);
        }
        self.last_act = Some(act.clone());
        act
    }

    fn reply(&mut self, system: &DialogueAct, db: &EntityDatabase) -> (DialogueAct, bool) {
        match system.act_type {
            ActType::Request | ActType::Select => match system.items.first() {
                Some(item) => {
                    let slot = item.slot.clone();
                    let progress = self.convey(&slot);
                    let value = self.goal.answer_for(&slot).to_string();
                    (DialogueAct::inform_one(slot, value), progress)
                }
                None => (DialogueAct::null(), false),
            },
            ActType::Confirm => {
                let Some(item) = system.items.first() else {
                    return (DialogueAct::null(), false);
                };
                let slot = item.slot.clone();
                let wanted = self.goal.answer_for(&slot).to_string();
                let mut progress = self.convey(&slot);
                progress |= self.confirmed.insert(slot.clone());
                if item.value.as_deref() == Some(wanted.as_str()) {
                    (DialogueAct::bare(ActType::Affirm), progress)
                } else {
                    (
                        DialogueAct::new(ActType::Negate, vec![ActItem::new(slot, wanted)]),
                        progress,
                    )
                }
            }
            ActType::Inform => self.react_to_offer(system, db),
            ActType::Repeat | ActType::Reqmore => match &self.last_act {
                Some(a) if a.act_type != ActType::Bye => (a.clone().with_confidence(1.0), false),
                _ => self.next_agenda_act(),
            },
            _ => self.next_agenda_act(),
        }
    }

    fn react_to_offer(&mut self, system: &DialogueAct, db: &EntityDatabase) -> (DialogueAct, bool) {
        let entity = system
            .value_of(ENTITY_NAME)
            .and_then(|name| db.by_name(name));
        let violated: Vec<(String, String)> = match entity {
            Some(e) => self
                .goal
                .constraints
                .iter()
                .filter(|(s, v)| !e.satisfies([(s.as_str(), v.as_str())]))
                .cloned()
                .collect(),
            // Nothing matched the system's constraints: correct the ones it
            // stated wrongly.
            None => self
                .goal
                .constraints
                .iter()
                .filter(|(s, v)| system.value_of(s).is_some_and(|said| said != v))
                .cloned()
                .collect(),
        };
        if let Some(first) = violated.first().cloned() {
            if let Some(old) = self.accepted.take() {
                log::trace!("user withdraws acceptance of {old}");
                self.reset_answers();
            }
            let progress = self.convey(&first.0);
            return (DialogueAct::inform_one(first.0, first.1), progress);
        }
        let Some(entity) = entity else {
            return self.next_agenda_act();
        };
        let mut progress = false;
        if self.accepted.as_deref() != Some(entity.name()) {
            self.reset_answers();
            self.accepted = Some(entity.name().to_string());
            progress = true;
        }
        for item in &system.items {
            if self.goal.requests.contains(&item.slot)
                && item.value.is_some()
                && self.answered.insert(item.slot.clone())
            {
                self.agenda.remove_request(&item.slot);
                progress = true;
            }
        }
        let (act, more) = self.next_agenda_act();
        (act, progress || more)
    }

    fn reset_answers(&mut self) {
        let answered: Vec<String> = std::mem::take(&mut self.answered).into_iter().collect();
        for slot in answered {
            self.agenda.restore_request(&slot);
        }
    }

    /// Pops the next thing the user wants to say.
    fn next_agenda_act(&mut self) -> (DialogueAct, bool) {
        if let Some((slot, value)) = self
            .agenda
            .pending_informs()
            .first()
            .map(|(s, v)| (s.to_string(), v.to_string()))
        {
            let progress = self.convey(&slot);
            return (DialogueAct::inform_one(slot, value), progress);
        }
        if self.accepted.is_some() {
            let pending = self.agenda.pending_requests();
            if !pending.is_empty() {
                let items = pending.into_iter().map(ActItem::slot_only).collect();
                return (DialogueAct::new(ActType::Request, items), false);
            }
            return (DialogueAct::bare(ActType::Bye), false);
        }
        (DialogueAct::null(), false)
    }

    /// Adds up to `max_volunteered` pending constraints to an inform.
    fn volunteer<R: Rng + ?Sized>(&mut self, act: &mut DialogueAct, rng: &mut R) -> bool {
        if self.behaviour.max_volunteered == 0 || self.behaviour.volunteer_prob <= 0.0 {
            return false;
        }
        let pending: Vec<(String, String)> = self
            .agenda
            .pending_informs()
            .into_iter()
            .filter(|(s, _)| !act.items.iter().any(|i| i.slot == *s))
            .map(|(s, v)| (s.to_string(), v.to_string()))
            .collect();
        let mut added = 0;
        for (slot, value) in pending {
            if added == self.behaviour.max_volunteered {
                break;
            }
            if rng.random_bool(self.behaviour.volunteer_prob) {
                self.convey(&slot);
                act.items.push(ActItem::new(slot, value));
                added += 1;
            }
        }
        if added > 0 && act.act_type != ActType::Inform {
            act.act_type = ActType::Inform;
        }
        added > 0
    }

    /// Marks a slot as conveyed; true the first time.
    fn convey(&mut self, slot: &str) -> bool {
        self.agenda.remove_inform(slot);
        self.conveyed.insert(slot.to_string())
    }
}
