//! Template NLG: one template per (act type, slot) from a per-domain asset.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use feudalgain::domain::{ActType, DialogueAct, DONTCARE, ENTITY_NAME, NONE};

use crate::error::{ServiceError, ServiceResult};

const CR_TEMPLATES: &str = include_str!("../assets/cr.templates");
const SFR_TEMPLATES: &str = include_str!("../assets/sfr.templates");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    table: HashMap<String, String>,
}

fn display_slot(slot: &str) -> &str {
    match slot {
        "pricerange" => "price range",
        "goodformeal" => "meal",
        "kidsallowed" => "kids policy",
        other => other,
    }
}

fn list_join(parts: &[String], last: &str) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., tail] => format!("{} {last} {tail}", init.join(", ")),
    }
}

impl Templates {
    /// Parses `key = text` lines; blank lines and `#` comments are skipped.
    pub fn parse(src: &str) -> ServiceResult<Self> {
        let mut table = HashMap::new();
        for (n, line) in src.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, text) = line.split_once('=').ok_or_else(|| {
                ServiceError::Config(format!("template line {} has no `=`", n + 1))
            })?;
            table.insert(key.trim().to_string(), text.trim().to_string());
        }
        for required in ["greeting", "bye"] {
            if !table.contains_key(required) {
                return Err(ServiceError::Config(format!(
                    "missing template `{required}`"
                )));
            }
        }
        Ok(Self { table })
    }

    pub fn load(path: impl AsRef<Path>) -> ServiceResult<Self> {
        let path = path.as_ref();
        let src = fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&src)
    }

    /// Bundled templates for an ontology name; the Cambridge set otherwise.
    pub fn for_ontology(name: &str) -> Self {
        let src = if name.to_ascii_lowercase().starts_with("sf") {
            SFR_TEMPLATES
        } else {
            CR_TEMPLATES
        };
        Self::parse(src).expect("bundled templates are valid")
    }

    pub fn greeting(&self) -> String {
        self.table["greeting"].clone()
    }

    fn lookup(&self, act: &str, slot: Option<&str>) -> Option<&str> {
        slot.and_then(|s| self.table.get(&format!("{act}.{s}")))
            .or_else(|| self.table.get(&format!("{act}.*")))
            .or_else(|| self.table.get(act))
            .map(String::as_str)
    }

    fn fill(&self, act: &str, slot: &str, value: &str) -> String {
        self.lookup(act, Some(slot))
            .unwrap_or("{slot} {value}")
            .replace("{slot}", display_slot(slot))
            .replace("{value}", value)
    }

    /// Renders a system act as text.
    pub fn render(&self, act: &DialogueAct) -> String {
        let first = act.items.first();
        let slot = first.map(|i| i.slot.as_str()).unwrap_or("");
        let value = first.and_then(|i| i.value.as_deref()).unwrap_or("");
        match act.act_type {
            ActType::Request => self.fill("request", slot, ""),
            ActType::Confirm if value == DONTCARE => self.fill("confirm.dontcare", slot, value),
            ActType::Confirm => self.fill("confirm", slot, value),
            ActType::Select => {
                let values: Vec<String> =
                    act.items.iter().filter_map(|i| i.value.clone()).collect();
                self.fill("select", slot, "")
                    .replace("{values}", &list_join(&values, "or"))
            }
            ActType::Inform => self.render_offer(act),
            other => self
                .lookup(other.as_str(), None)
                .unwrap_or(other.as_str())
                .to_string(),
        }
    }

    fn render_offer(&self, act: &DialogueAct) -> String {
        let name = act.value_of(ENTITY_NAME).unwrap_or(NONE);
        let rest = act.items.iter().filter(|i| i.slot != ENTITY_NAME);
        if name == NONE {
            let parts: Vec<String> = rest
                .filter_map(|i| Some(self.fill("constraint", &i.slot, i.value.as_deref()?)))
                .collect();
            let details = if parts.is_empty() {
                String::new()
            } else {
                format!(" {}", list_join(&parts, "and"))
            };
            return self
                .lookup("offer.none", None)
                .unwrap_or("There is no match{details}.")
                .replace("{details}", &details);
        }
        let parts: Vec<String> = rest
            .filter_map(|i| Some(self.fill("detail", &i.slot, i.value.as_deref()?)))
            .collect();
        let details = if parts.is_empty() {
            String::new()
        } else {
            format!(", {}", list_join(&parts, "and"))
        };
        self.lookup("offer", None)
            .unwrap_or("{name}{details}.")
            .replace("{name}", name)
            .replace("{details}", &details)
    }
}
