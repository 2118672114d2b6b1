use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{EntityDatabase, Ontology, DONTCARE};

const INCLUDE_SLOT_PROB: f64 = 0.6;
const DONTCARE_PROB: f64 = 0.05;
const MAX_TRIES: usize = 100;
const DEFAULT_PATIENCE: u32 = 5;

/// What the simulated user wants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserGoal {
    /// `(slot, value)` over distinct informable slots; value may be `dontcare`.
    pub constraints: Vec<(String, String)>,
    /// Requestable slots the user wants to be told about; never empty.
    pub requests: Vec<String>,
    pub patience: u32,
}

impl UserGoal {
    pub fn value_for(&self, slot: &str) -> Option<&str> {
        self.constraints
            .iter()
            .find(|(s, _)| s == slot)
            .map(|(_, v)| v.as_str())
    }

    /// The value the user would give when asked about `slot`.
    pub fn answer_for(&self, slot: &str) -> &str {
        self.value_for(slot).unwrap_or(DONTCARE)
    }

    pub fn constraint_pairs(&self) -> Vec<(&str, &str)> {
        self.constraints
            .iter()
            .map(|(s, v)| (s.as_str(), v.as_str()))
            .collect()
    }
}

fn draw_constraints<R: Rng + ?Sized>(ontology: &Ontology, rng: &mut R) -> Vec<(String, String)> {
    let mut constraints = Vec::new();
    for slot in ontology.informable() {
        if rng.random_bool(INCLUDE_SLOT_PROB) {
            let value = if rng.random_bool(DONTCARE_PROB) {
                DONTCARE.to_string()
            } else {
                slot.values.choose(rng).unwrap().clone()
            };
            constraints.push((slot.name.clone(), value));
        }
    }
    if constraints.is_empty() {
        let slot = ontology.informable().choose(rng).unwrap();
        constraints.push((slot.name.clone(), slot.values.choose(rng).unwrap().clone()));
    }
    constraints
}

fn satisfiable(db: &EntityDatabase, constraints: &[(String, String)]) -> bool {
    let pairs: Vec<(&str, &str)> = constraints
        .iter()
        .map(|(s, v)| (s.as_str(), v.as_str()))
        .collect();
    db.count_matches(&pairs) > 0
}

/// Samples a goal that at least one entity satisfies.
///
/// Each informable slot is constrained with probability 0.6 (and then
/// `dontcare` with probability 0.05). Unsatisfiable draws are resampled up to
/// 100 times; after that constraints are dropped until the goal is
/// satisfiable, falling back to a random entity's value.
pub fn sample_goal<R: Rng + ?Sized>(
    ontology: &Ontology,
    db: &EntityDatabase,
    rng: &mut R,
) -> UserGoal {
    assert!(!db.is_empty(), "cannot sample goals from an empty database");
    let mut constraints = draw_constraints(ontology, rng);
    let mut tries = 1;
    while !satisfiable(db, &constraints) && tries < MAX_TRIES {
        constraints = draw_constraints(ontology, rng);
        tries += 1;
    }
    while !satisfiable(db, &constraints) && constraints.len() > 1 {
        let drop = rng.random_range(0..constraints.len());
        constraints.remove(drop);
    }
    if !satisfiable(db, &constraints) {
        let entity = db.entities.choose(rng).unwrap();
        let slot = constraints[0].0.clone();
        constraints[0].1 = entity.get(&slot).unwrap().to_string();
    }

    let mut candidates: Vec<&String> = ontology
        .requestable()
        .iter()
        .filter(|r| !constraints.iter().any(|(s, v)| s == *r && v != DONTCARE))
        .collect();
    candidates.shuffle(rng);
    let n = rng.random_range(1..=3).min(candidates.len()).max(1);
    let requests = candidates.into_iter().take(n).cloned().collect();

    UserGoal {
        constraints,
        requests,
        patience: DEFAULT_PATIENCE,
    }
}
