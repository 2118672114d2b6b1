//! Focus belief tracking.
//!
//! Each informable slot carries a distribution over its values plus
//! `dontcare` and `none`. New evidence of total mass `m` overwrites a `1 - m`
//! fraction of the previous distribution:
//!
//! `p'(v) = q(v) + (1 - m) p(v)`, with `q(none) = 0`.

mod evidence;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use evidence::evidence_from_act;

use crate::domain::{ActType, Ontology, SystemAction, NONE};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotDistribution {
    pub slot: String,
    /// Ordered as the ontology values, then `dontcare`, then `none`.
    pub probs: Vec<f64>,
}

impl SlotDistribution {
    pub fn none_index(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn dontcare_index(&self) -> usize {
        self.probs.len() - 2
    }

    pub fn num_values(&self) -> usize {
        self.probs.len() - 2
    }

    pub fn p_none(&self) -> f64 {
        self.probs[self.none_index()]
    }

    pub fn p_dontcare(&self) -> f64 {
        self.probs[self.dontcare_index()]
    }

    /// Index of the most likely entry of the whole support. Ties go to the
    /// earliest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.probs)
    }

    /// Most likely ontology value (dontcare and none excluded) and its
    /// probability.
    pub fn top_real(&self) -> (usize, f64) {
        let i = argmax(&self.probs[..self.num_values()]);
        (i, self.probs[i])
    }

    /// Most likely entry other than `none`.
    pub fn top_informative(&self) -> (usize, f64) {
        let i = argmax(&self.probs[..self.none_index()]);
        (i, self.probs[i])
    }

    /// True when `none` is (one of) the most likely entries.
    pub fn none_is_max(&self) -> bool {
        let max = self.probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.p_none() >= max
    }

    /// Shannon entropy divided by `ln(support size)`, in `[0, 1]`.
    pub fn normalised_entropy(&self) -> f64 {
        let h: f64 = self
            .probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        (h / (self.probs.len() as f64).ln()).clamp(0.0, 1.0)
    }

    /// Indices of the `k` most likely ontology values, most likely first.
    pub fn top_values(&self, k: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.num_values()).collect();
        idx.sort_by(|&a, &b| self.probs[b].total_cmp(&self.probs[a]).then(a.cmp(&b)));
        idx.truncate(k);
        idx
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub slots: Vec<SlotDistribution>,
    /// Requestable slots the user has asked for and not yet been told.
    pub requested: BTreeSet<String>,
    pub last_user_act: Option<ActType>,
    pub last_system_action: Option<SystemAction>,
    pub turn: u32,
    /// Name of the entity most recently offered by the system.
    pub offered_entity: Option<String>,
}

impl BeliefState {
    pub fn slot(&self, index: usize) -> &SlotDistribution {
        &self.slots[index]
    }

    /// Constraints implied by the belief: each slot's most likely
    /// non-`none` entry, for slots whose top entry is not `none`.
    pub fn constraints<'a>(&'a self, ontology: &'a Ontology) -> Vec<(&'a str, &'a str)> {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, d)| d.argmax() != d.none_index())
            .map(|(i, d)| {
                let top = d.argmax();
                (
                    ontology.slot(i).name.as_str(),
                    ontology.support_value(i, top),
                )
            })
            .collect()
    }

    /// Number of slots whose most likely entry is not `none`.
    pub fn num_resolved(&self) -> usize {
        self.slots
            .iter()
            .filter(|d| d.argmax() != d.none_index())
            .count()
    }

    /// Records the action the system just took and the entity it offered.
    pub fn record_system_action(&mut self, action: SystemAction, offered: Option<String>) {
        self.last_system_action = Some(action);
        if offered.is_some() {
            self.offered_entity = offered;
        }
    }

    pub fn is_normalised(&self) -> bool {
        self.slots
            .iter()
            .all(|d| (d.sum() - 1.0).abs() <= NORM_TOL && d.probs.iter().all(|&p| p >= 0.0))
    }
}

/// Per-turn observation fed to the tracker.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TurnEvidence {
    /// Slot -> (value or `dontcare`) -> mass.
    pub slot_mass: BTreeMap<String, BTreeMap<String, f64>>,
    /// Requestable slots newly asked for.
    pub requests: Vec<String>,
    /// Requestable slots the system answered this turn.
    pub answered: Vec<String>,
    pub act_type: Option<ActType>,
}

impl TurnEvidence {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn add_mass(&mut self, slot: &str, value: &str, mass: f64) {
        *self
            .slot_mass
            .entry(slot.to_string())
            .or_default()
            .entry(value.to_string())
            .or_insert(0.0) += mass;
    }

    pub fn total_mass(&self, slot: &str) -> f64 {
        self.slot_mass
            .get(slot)
            .map(|m| m.values().sum())
            .unwrap_or(0.0)
    }
}

pub fn initial_belief(ontology: &Ontology) -> BeliefState {
    let slots = ontology
        .informable()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut probs = vec![0.0; ontology.support_len(i)];
            *probs.last_mut().unwrap() = 1.0;
            SlotDistribution {
                slot: s.name.clone(),
                probs,
            }
        })
        .collect();
    BeliefState {
        slots,
        requested: BTreeSet::new(),
        last_user_act: None,
        last_system_action: None,
        turn: 0,
        offered_entity: None,
    }
}

/// Applies one turn of evidence with the focus rule.
pub fn focus_update(
    ontology: &Ontology,
    belief: &BeliefState,
    evidence: &TurnEvidence,
) -> Result<BeliefState> {
    let mut next = belief.clone();
    for (slot, masses) in &evidence.slot_mass {
        let si = ontology.require_slot(slot)?;
        let mut q = vec![0.0; ontology.support_len(si)];
        for (value, &mass) in masses {
            if value == NONE {
                return Err(Error::UnknownValue {
                    slot: slot.clone(),
                    value: value.clone(),
                });
            }
            let vi = ontology
                .support_index(si, value)
                .ok_or_else(|| Error::UnknownValue {
                    slot: slot.clone(),
                    value: value.clone(),
                })?;
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "negative or non-finite evidence mass {mass} for {slot}={value}"
                )));
            }
            q[vi] += mass;
        }
        let m: f64 = q.iter().sum();
        if m > 1.0 + NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "evidence mass {m} for slot `{slot}` exceeds 1"
            )));
        }
        let keep = (1.0 - m).max(0.0);
        let dist = &mut next.slots[si];
        for (p, qv) in dist.probs.iter_mut().zip(&q) {
            *p = qv + keep * *p;
        }
        // Re-normalise away rounding drift; the rule preserves total mass.
        let total: f64 = dist.probs.iter().sum();
        for p in &mut dist.probs {
            *p /= total;
        }
    }
    for slot in &evidence.answered {
        next.requested.remove(slot);
    }
    for slot in &evidence.requests {
        if !ontology.is_requestable(slot) {
            return Err(Error::UnknownSlot(slot.clone()));
        }
        next.requested.insert(slot.clone());
    }
    if let Some(t) = evidence.act_type {
        next.last_user_act = Some(t);
    }
    next.turn += 1;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Domain, DONTCARE};

    fn cr() -> Ontology {
        Domain::cambridge_restaurants().ontology
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn initial_is_point_mass_on_none() {
        let b = initial_belief(&cr());
        assert_eq!(b.slots[0].probs, vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(b.is_normalised());
        assert!(b.offered_entity.is_none());
        assert!(b.requested.is_empty());
        assert_eq!(b.turn, 0);
    }

    #[test]
    fn focus_rule_from_initial() {
        let o = cr();
        let b = initial_belief(&o);
        let mut ev = TurnEvidence::empty();
        ev.add_mass("pricerange", "cheap", 0.5);
        ev.add_mass("pricerange", "moderate", 0.3);
        ev.add_mass("pricerange", "expensive", 0.2);
        let b2 = focus_update(&o, &b, &ev).unwrap();
        assert!(close(&b2.slots[0].probs, &[0.5, 0.3, 0.2, 0.0, 0.0]));
        assert_eq!(b2.turn, 1);
    }

    #[test]
    fn focus_rule_partial_mass() {
        let o = cr();
        let mut b = initial_belief(&o);
        b.slots[0].probs = vec![0.5, 0.3, 0.2, 0.0, 0.0];
        let mut ev = TurnEvidence::empty();
        ev.add_mass("pricerange", "cheap", 0.9);
        let b2 = focus_update(&o, &b, &ev).unwrap();
        // Scalar recomputation: 0.9 + 0.1 * p.
        let expected: Vec<f64> = [0.5, 0.3, 0.2, 0.0, 0.0]
            .iter()
            .enumerate()
            .map(|(i, p)| if i == 0 { 0.9 } else { 0.0 } + 0.1 * p)
            .collect();
        assert!(close(&b2.slots[0].probs, &expected));
        assert!(close(&b2.slots[0].probs, &[0.95, 0.03, 0.02, 0.0, 0.0]));
    }

    #[test]
    fn empty_evidence_is_identity() {
        let o = cr();
        let mut b = initial_belief(&o);
        b.slots[1].probs = vec![0.1, 0.2, 0.3, 0.1, 0.1, 0.1, 0.1];
        let b2 = focus_update(&o, &b, &TurnEvidence::empty()).unwrap();
        assert_eq!(b2.slots, b.slots);
        assert_eq!(b2.turn, b.turn + 1);
    }

    #[test]
    fn requests_added_and_cleared() {
        let o = cr();
        let b = initial_belief(&o);
        let ev = TurnEvidence {
            requests: vec!["phone".into(), "address".into()],
            ..Default::default()
        };
        let b2 = focus_update(&o, &b, &ev).unwrap();
        assert_eq!(b2.requested.len(), 2);
        let ev = TurnEvidence {
            answered: vec!["phone".into()],
            ..Default::default()
        };
        let b3 = focus_update(&o, &b2, &ev).unwrap();
        assert!(b3.requested.contains("address") && !b3.requested.contains("phone"));
    }

    #[test]
    fn rejects_unknown_slot_or_value() {
        let o = cr();
        let b = initial_belief(&o);
        let mut ev = TurnEvidence::empty();
        ev.add_mass("stars", "5", 0.5);
        assert!(matches!(
            focus_update(&o, &b, &ev),
            Err(Error::UnknownSlot(_))
        ));
        let mut ev = TurnEvidence::empty();
        ev.add_mass("area", "moon", 0.5);
        assert!(matches!(
            focus_update(&o, &b, &ev),
            Err(Error::UnknownValue { .. })
        ));
        let mut ev = TurnEvidence::empty();
        ev.add_mass("area", "none", 0.5);
        assert!(focus_update(&o, &b, &ev).is_err());
        let ev = TurnEvidence {
            requests: vec!["stars".into()],
            ..Default::default()
        };
        assert!(focus_update(&o, &b, &ev).is_err());
    }

    #[test]
    fn rejects_excess_mass() {
        let o = cr();
        let b = initial_belief(&o);
        let mut ev = TurnEvidence::empty();
        ev.add_mass("area", "north", 0.7);
        ev.add_mass("area", "south", 0.7);
        assert!(focus_update(&o, &b, &ev).is_err());
    }

    #[test]
    fn constraints_follow_top_entries() {
        let o = cr();
        let mut b = initial_belief(&o);
        b.slots[0].probs = vec![0.7, 0.1, 0.0, 0.0, 0.2];
        b.slots[2].probs = vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.9, 0.1];
        assert_eq!(
            b.constraints(&o),
            vec![("pricerange", "cheap"), ("food", DONTCARE)]
        );
        assert_eq!(b.num_resolved(), 2);
    }
}
