use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tracker-level pseudo-value: the user has no preference for the slot.
pub const DONTCARE: &str = "dontcare";
/// Tracker-level pseudo-value: nothing is known about the slot yet.
pub const NONE: &str = "none";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InformableSlot {
    #[serde(rename = "slot")]
    pub name: String,
    pub values: Vec<String>,
    /// Surface synonyms per value, used by the rule-based NLU.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub synonyms: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct OntologyFile {
    name: String,
    informable: Vec<InformableSlot>,
    requestable: Vec<String>,
}

/// Slot/value inventory of a domain. Slot and value order is file order and
/// is index-stable: action ids and belief supports are derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    name: String,
    informable: Vec<InformableSlot>,
    requestable: Vec<String>,
}

impl Ontology {
    pub fn new(
        name: impl Into<String>,
        informable: Vec<InformableSlot>,
        requestable: Vec<String>,
    ) -> Result<Self> {
        let ontology = Self {
            name: name.into(),
            informable,
            requestable,
        };
        ontology.validate()?;
        Ok(ontology)
    }

    pub fn from_json_str(src: &str) -> Result<Self> {
        let file: OntologyFile = serde_json::from_str(src).map_err(|e| Error::Parse {
            what: "ontology".into(),
            msg: e.to_string(),
        })?;
        Self::new(file.name, file.informable, file.requestable)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&src)
    }

    pub fn to_json_string(&self) -> String {
        let file = OntologyFile {
            name: self.name.clone(),
            informable: self.informable.clone(),
            requestable: self.requestable.clone(),
        };
        serde_json::to_string_pretty(&file).expect("ontology serialises")
    }

    fn validate(&self) -> Result<()> {
        if self.informable.is_empty() {
            return Err(Error::InvalidOntology("no informable slots".into()));
        }
        let mut seen = HashSet::new();
        for slot in &self.informable {
            if !seen.insert(slot.name.as_str()) {
                return Err(Error::InvalidOntology(format!(
                    "duplicate slot `{}`",
                    slot.name
                )));
            }
            if slot.values.len() < 2 {
                return Err(Error::InvalidOntology(format!(
                    "slot `{}` needs at least two values",
                    slot.name
                )));
            }
            let mut values = HashSet::new();
            for v in &slot.values {
                if v == DONTCARE || v == NONE {
                    return Err(Error::InvalidOntology(format!(
                        "slot `{}` lists reserved value `{v}`",
                        slot.name
                    )));
                }
                if !values.insert(v.as_str()) {
                    return Err(Error::InvalidOntology(format!(
                        "slot `{}` lists value `{v}` twice",
                        slot.name
                    )));
                }
            }
            for key in slot.synonyms.keys() {
                if !values.contains(key.as_str()) && key != DONTCARE {
                    return Err(Error::InvalidOntology(format!(
                        "synonyms given for unknown value `{key}` of slot `{}`",
                        slot.name
                    )));
                }
            }
        }
        let mut req = HashSet::new();
        for r in &self.requestable {
            if !req.insert(r.as_str()) {
                return Err(Error::InvalidOntology(format!(
                    "duplicate requestable slot `{r}`"
                )));
            }
        }
        if let Some(missing) = self
            .informable
            .iter()
            .find(|s| !req.contains(s.name.as_str()))
        {
            return Err(Error::InvalidOntology(format!(
                "informable slot `{}` is not requestable",
                missing.name
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn informable(&self) -> &[InformableSlot] {
        &self.informable
    }

    pub fn requestable(&self) -> &[String] {
        &self.requestable
    }

    pub fn num_slots(&self) -> usize {
        self.informable.len()
    }

    pub fn slot(&self, index: usize) -> &InformableSlot {
        &self.informable[index]
    }

    pub fn slot_index(&self, name: &str) -> Option<usize> {
        self.informable.iter().position(|s| s.name == name)
    }

    pub fn require_slot(&self, name: &str) -> Result<usize> {
        self.slot_index(name)
            .ok_or_else(|| Error::UnknownSlot(name.to_string()))
    }

    pub fn is_requestable(&self, name: &str) -> bool {
        self.requestable.iter().any(|r| r == name)
    }

    pub fn requestable_index(&self, name: &str) -> Option<usize> {
        self.requestable.iter().position(|r| r == name)
    }

    /// Size of a slot's belief support: its values plus `dontcare` and `none`.
    pub fn support_len(&self, slot: usize) -> usize {
        self.informable[slot].values.len() + 2
    }

    /// Index of `value` within the belief support of `slot`.
    pub fn support_index(&self, slot: usize, value: &str) -> Option<usize> {
        let values = &self.informable[slot].values;
        match value {
            DONTCARE => Some(values.len()),
            NONE => Some(values.len() + 1),
            v => values.iter().position(|x| x == v),
        }
    }

    /// Inverse of [`Ontology::support_index`].
    pub fn support_value(&self, slot: usize, index: usize) -> &str {
        let values = &self.informable[slot].values;
        match index {
            i if i < values.len() => &values[i],
            i if i == values.len() => DONTCARE,
            _ => NONE,
        }
    }

    pub fn has_value(&self, slot: &str, value: &str) -> bool {
        self.slot_index(slot)
            .map(|i| self.informable[i].values.iter().any(|v| v == value))
            .unwrap_or(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(slots: &str) -> String {
        format!(
            r#"{{"name": "toy", "informable": [{slots}], "requestable": ["pricerange", "area", "food", "phone"]}}"#
        )
    }

    #[test]
    fn keeps_file_order() {
        let src = toy(
            r#"{"slot": "pricerange", "values": ["cheap", "moderate", "expensive"]},
               {"slot": "area", "values": ["north", "south"]},
               {"slot": "food", "values": ["thai", "indian"]}"#,
        );
        let o = Ontology::from_json_str(&src).unwrap();
        assert_eq!(o.num_slots(), 3);
        assert_eq!(o.slot(0).name, "pricerange");
        assert_eq!(o.support_index(0, "expensive"), Some(2));
        assert_eq!(o.support_index(0, DONTCARE), Some(3));
        assert_eq!(o.support_index(0, NONE), Some(4));
        assert_eq!(o.support_value(1, 3), NONE);
    }

    #[test]
    fn rejects_duplicate_slot() {
        let src = toy(r#"{"slot": "area", "values": ["north", "south"]},
               {"slot": "area", "values": ["east", "west"]}"#);
        let err = Ontology::from_json_str(&src).unwrap_err();
        assert!(err.to_string().contains("duplicate slot"), "{err}");
    }

    #[test]
    fn rejects_reserved_value() {
        let src = toy(r#"{"slot": "area", "values": ["north", "none"]}"#);
        assert!(Ontology::from_json_str(&src).is_err());
        let src = toy(r#"{"slot": "area", "values": ["dontcare", "north"]}"#);
        assert!(Ontology::from_json_str(&src).is_err());
    }

    #[test]
    fn rejects_short_or_empty() {
        let src = toy(r#"{"slot": "area", "values": ["north"]}"#);
        assert!(Ontology::from_json_str(&src).is_err());
        assert!(Ontology::from_json_str(&toy("")).is_err());
    }

    #[test]
    fn rejects_malformed_json() {
        let err = Ontology::from_json_str("{not json").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
