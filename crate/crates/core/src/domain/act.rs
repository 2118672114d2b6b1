use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActType {
    Request,
    Confirm,
    Select,
    Inform,
    Affirm,
    Negate,
    Hello,
    Bye,
    Reqmore,
    Repeat,
    Null,
    Pass,
}

impl ActType {
    pub const ALL: [ActType; 12] = [
        ActType::Request,
        ActType::Confirm,
        ActType::Select,
        ActType::Inform,
        ActType::Affirm,
        ActType::Negate,
        ActType::Hello,
        ActType::Bye,
        ActType::Reqmore,
        ActType::Repeat,
        ActType::Null,
        ActType::Pass,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|a| *a == self).unwrap()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActType::Request => "request",
            ActType::Confirm => "confirm",
            ActType::Select => "select",
            ActType::Inform => "inform",
            ActType::Affirm => "affirm",
            ActType::Negate => "negate",
            ActType::Hello => "hello",
            ActType::Bye => "bye",
            ActType::Reqmore => "reqmore",
            ActType::Repeat => "repeat",
            ActType::Null => "null",
            ActType::Pass => "pass",
        }
    }
}

impl fmt::Display for ActType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActItem {
    pub slot: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
}

impl ActItem {
    pub fn new(slot: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            slot: slot.into(),
            value: Some(value.into()),
        }
    }

    pub fn slot_only(slot: impl Into<String>) -> Self {
        Self {
            slot: slot.into(),
            value: None,
        }
    }
}

/// A typed semantic act with its slot-value payload.
///
/// `confidence` only carries information on the user-to-system channel; acts
/// produced by the system always have confidence 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueAct {
    pub act_type: ActType,
    #[serde(default)]
    pub items: Vec<ActItem>,
    pub confidence: f64,
}

impl DialogueAct {
    pub fn new(act_type: ActType, items: Vec<ActItem>) -> Self {
        Self {
            act_type,
            items,
            confidence: 1.0,
        }
    }

    pub fn bare(act_type: ActType) -> Self {
        Self::new(act_type, Vec::new())
    }

    pub fn request(slot: impl Into<String>) -> Self {
        Self::new(ActType::Request, vec![ActItem::slot_only(slot)])
    }

    pub fn confirm(slot: impl Into<String>, value: impl Into<String>) -> Self {
        Self::new(ActType::Confirm, vec![ActItem::new(slot, value)])
    }

    pub fn select(slot: &str, values: &[&str]) -> Self {
        Self::new(
            ActType::Select,
            values.iter().map(|v| ActItem::new(slot, *v)).collect(),
        )
    }

    pub fn inform(items: Vec<ActItem>) -> Self {
        Self::new(ActType::Inform, items)
    }

    pub fn inform_one(slot: impl Into<String>, value: impl Into<String>) -> Self {
        Self::inform(vec![ActItem::new(slot, value)])
    }

    pub fn null() -> Self {
        Self::bare(ActType::Null)
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    /// Value of the first item mentioning `slot`.
    pub fn value_of(&self, slot: &str) -> Option<&str> {
        self.items
            .iter()
            .find(|i| i.slot == slot)
            .and_then(|i| i.value.as_deref())
    }

    /// Checks the structural invariants of each act type.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::InvalidAct(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        let bad = |msg: &str| Err(Error::InvalidAct(format!("{}: {msg}", self.act_type)));
        match self.act_type {
            ActType::Request => {
                if self.items.is_empty() || self.items.iter().any(|i| i.value.is_some()) {
                    return bad("must carry slots and no values");
                }
            }
            ActType::Confirm => {
                if self.items.len() != 1 || self.items[0].value.is_none() {
                    return bad("must carry exactly one slot-value pair");
                }
            }
            ActType::Select => {
                let first = self.items.first().map(|i| i.slot.as_str());
                if self.items.len() < 2
                    || self.items.iter().any(|i| Some(i.slot.as_str()) != first)
                    || self.items.iter().any(|i| i.value.is_none())
                {
                    return bad("must carry one slot with at least two values");
                }
            }
            ActType::Pass if !self.items.is_empty() => return bad("carries nothing"),
            _ => {}
        }
        Ok(())
    }
}

impl fmt::Display for DialogueAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.act_type)?;
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match &item.value {
                Some(v) => write!(f, "{}={}", item.slot, v)?,
                None => f.write_str(&item.slot)?,
            }
        }
        f.write_str(")")
    }
}
