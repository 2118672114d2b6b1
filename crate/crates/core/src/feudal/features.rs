//! Belief-state features for the slot policies and the master policy.
//!
//! Every slot block has the same layout, so the slot-shared Q-network sees
//! slot identity only through the values it is given.

use crate::belief::{BeliefState, SlotDistribution};
use crate::domain::{ActType, Domain, SystemAction};

/// Per-slot distribution summary width.
pub const SLOT_BLOCK: usize = 7;
/// Bits telling whether the last system action was a request, confirm or
/// select on the slot at hand.
pub const SLOT_ACTION_BITS: usize = 3;
const DB_BUCKETS: usize = 4;
const SYSTEM_KINDS: usize = SystemAction::NUM_KINDS + 1;
const USER_KINDS: usize = ActType::ALL.len() + 1;

/// Dimensions of the feature vectors for one domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub num_slots: usize,
    pub num_requestable: usize,
    max_values: usize,
    max_turns: usize,
}

impl FeatureLayout {
    pub fn new(domain: &Domain, max_turns: usize) -> Self {
        let o = &domain.ontology;
        Self {
            num_slots: o.num_slots(),
            num_requestable: o.requestable().len(),
            max_values: o
                .informable()
                .iter()
                .map(|s| s.values.len())
                .max()
                .unwrap_or(1),
            max_turns: max_turns.max(1),
        }
    }

    /// DB bucket, requested bits, last system kind, last user act type,
    /// offered flag, offer-still-valid flag, turn fraction.
    pub fn global_dim(&self) -> usize {
        DB_BUCKETS + self.num_requestable + SYSTEM_KINDS + USER_KINDS + 3
    }

    pub fn slot_dim(&self) -> usize {
        SLOT_BLOCK + SLOT_ACTION_BITS + self.global_dim()
    }

    pub fn master_dim(&self) -> usize {
        SLOT_BLOCK * self.num_slots + self.global_dim()
    }
}

/// Features of one belief state.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefFeatures {
    /// One row per slot, each `slot_dim` wide, row-major.
    pub slots: Vec<f64>,
    pub master: Vec<f64>,
    pub slot_dim: usize,
}

impl BeliefFeatures {
    pub fn slot_row(&self, slot: usize) -> &[f64] {
        &self.slots[slot * self.slot_dim..(slot + 1) * self.slot_dim]
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len() / self.slot_dim
    }
}

fn slot_block(dist: &SlotDistribution, max_values: usize, out: &mut Vec<f64>) {
    let top = dist.top_values(3);
    for k in 0..3 {
        out.push(top.get(k).map_or(0.0, |&i| dist.probs[i]));
    }
    out.push(dist.p_dontcare());
    out.push(dist.p_none());
    out.push(dist.normalised_entropy());
    out.push(dist.num_values() as f64 / max_values as f64);
}

fn db_bucket(count: usize) -> usize {
    match count {
        0 => 0,
        1 => 1,
        2..=4 => 2,
        _ => 3,
    }
}

fn global_block(layout: &FeatureLayout, belief: &BeliefState, domain: &Domain) -> Vec<f64> {
    let o = &domain.ontology;
    let mut g = vec![0.0; layout.global_dim()];
    let constraints = belief.constraints(o);
    g[db_bucket(domain.db.count_matches(&constraints))] = 1.0;
    let mut at = DB_BUCKETS;
    for r in &belief.requested {
        if let Some(i) = o.requestable_index(r) {
            g[at + i] = 1.0;
        }
    }
    at += layout.num_requestable;
    let sys = belief
        .last_system_action
        .map_or(SystemAction::NUM_KINDS, |a| a.kind_index());
    g[at + sys] = 1.0;
    at += SYSTEM_KINDS;
    let user = belief
        .last_user_act
        .map_or(ActType::ALL.len(), |a| a.index());
    g[at + user] = 1.0;
    at += USER_KINDS;
    if let Some(name) = &belief.offered_entity {
        g[at] = 1.0;
        let valid = domain
            .db
            .by_name(name)
            .is_some_and(|e| e.satisfies(constraints.iter().copied()));
        g[at + 1] = if valid { 1.0 } else { 0.0 };
    }
    g[at + 2] = (belief.turn as f64 / layout.max_turns as f64).min(1.0);
    g
}

pub fn belief_features(
    layout: &FeatureLayout,
    belief: &BeliefState,
    domain: &Domain,
) -> BeliefFeatures {
    let global = global_block(layout, belief, domain);
    let slot_dim = layout.slot_dim();
    let mut slots = Vec::with_capacity(slot_dim * layout.num_slots);
    let mut master = Vec::with_capacity(layout.master_dim());
    for (i, dist) in belief.slots.iter().enumerate() {
        let start = slots.len();
        slot_block(dist, layout.max_values, &mut slots);
        master.extend_from_slice(&slots[start..]);
        let mut bits = [0.0; SLOT_ACTION_BITS];
        if let Some(SystemAction::Info { kind, slot }) = belief.last_system_action {
            if slot == i {
                bits[kind.index()] = 1.0;
            }
        }
        slots.extend_from_slice(&bits);
        slots.extend_from_slice(&global);
    }
    master.extend_from_slice(&global);
    BeliefFeatures {
        slots,
        master,
        slot_dim,
    }
}
