use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ontology::{Ontology, DONTCARE};
use crate::error::{Error, Result};

/// Key under which every entity stores its display name.
pub const ENTITY_NAME: &str = "name";

/// One row of the entity table. Attribute order is irrelevant; the JSON form
/// is a flat object `{"name": ..., slot: value, ...}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Entity(pub BTreeMap<String, String>);

impl Entity {
    pub fn name(&self) -> &str {
        self.0.get(ENTITY_NAME).map(String::as_str).unwrap_or("")
    }

    pub fn get(&self, slot: &str) -> Option<&str> {
        self.0.get(slot).map(String::as_str)
    }

    /// True when the entity satisfies every non-dontcare constraint.
    pub fn satisfies<'a>(&self, constraints: impl IntoIterator<Item = (&'a str, &'a str)>) -> bool {
        constraints
            .into_iter()
            .all(|(slot, value)| value == DONTCARE || self.get(slot) == Some(value))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityDatabase {
    pub entities: Vec<Entity>,
}

impl EntityDatabase {
    pub fn from_json_str(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Parse {
            what: "database".into(),
            msg: e.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&src)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("database serialises")
    }

    pub fn validate(&self, ontology: &Ontology) -> Result<()> {
        for (i, e) in self.entities.iter().enumerate() {
            if e.get(ENTITY_NAME).is_none() {
                return Err(Error::InvalidDatabase(format!("entity #{i} has no name")));
            }
            for r in ontology.requestable() {
                if e.get(r).is_none() {
                    return Err(Error::InvalidDatabase(format!(
                        "entity `{}` does not define requestable slot `{r}`",
                        e.name()
                    )));
                }
            }
            for slot in ontology.informable() {
                let v = e.get(&slot.name).unwrap_or_default();
                if !slot.values.iter().any(|x| x == v) {
                    return Err(Error::InvalidDatabase(format!(
                        "entity `{}` uses value `{v}` not in the ontology for `{}`",
                        e.name(),
                        slot.name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn by_name(&self, name: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.name() == name)
    }

    /// Entities matching all non-dontcare constraints, in database order.
    pub fn query<S: AsRef<str>>(
        &self,
        ontology: &Ontology,
        constraints: &[(S, S)],
    ) -> Result<Vec<&Entity>> {
        for (slot, _) in constraints {
            ontology.require_slot(slot.as_ref())?;
        }
        Ok(self
            .entities
            .iter()
            .filter(|e| e.satisfies(constraints.iter().map(|(s, v)| (s.as_ref(), v.as_ref()))))
            .collect())
    }

    /// Number of matches, without materialising them.
    pub fn count_matches(&self, constraints: &[(&str, &str)]) -> usize {
        self.entities
            .iter()
            .filter(|e| e.satisfies(constraints.iter().copied()))
            .count()
    }

    /// Procedurally generates `n` entities with uniformly drawn informable
    /// values and synthetic contact details.
    pub fn generate(ontology: &Ontology, n: usize, seed: u64) -> Self {
        const STREETS: &[&str] = &[
            "Regent Street",
            "Mill Road",
            "King Street",
            "Hills Road",
            "Bridge Street",
            "Market Square",
            "Station Road",
            "Castle Hill",
        ];
        let mut rng = crate::rng::from_seed(seed);
        let prefix: String = ontology
            .name()
            .chars()
            .filter(|c| c.is_ascii_uppercase())
            .collect::<String>()
            .to_ascii_lowercase();
        let entities = (0..n)
            .map(|i| {
                let mut attrs = BTreeMap::new();
                attrs.insert(ENTITY_NAME.to_string(), format!("{prefix}-{i:03}"));
                for slot in ontology.informable() {
                    let v = slot.values.choose(&mut rng).expect("slot has values");
                    attrs.insert(slot.name.clone(), v.clone());
                }
                for r in ontology.requestable() {
                    if attrs.contains_key(r) {
                        continue;
                    }
                    let value = match r.as_str() {
                        "address" => format!(
                            "{} {}",
                            rng.random_range(1..200),
                            STREETS.choose(&mut rng).unwrap()
                        ),
                        "phone" => format!("01223 {:06}", rng.random_range(0..1_000_000)),
                        "postcode" => format!(
                            "CB{} {}{}{}",
                            rng.random_range(1..6),
                            rng.random_range(1..10),
                            (b'A' + rng.random_range(0..26u8)) as char,
                            (b'A' + rng.random_range(0..26u8)) as char
                        ),
                        "price" => format!("{} dollars", 10 + 5 * rng.random_range(0..12)),
                        other => format!("{other}-{i:03}"),
                    };
                    attrs.insert(r.clone(), value);
                }
                Entity(attrs)
            })
            .collect();
        Self { entities }
    }
}
