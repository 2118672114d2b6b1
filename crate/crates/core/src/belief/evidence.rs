use log::warn;

use super::TurnEvidence;
use crate::domain::{ActType, DialogueAct, Ontology, DONTCARE};

/// Converts an observed user act into tracker evidence.
///
/// `context` is the system act of the same turn. It disambiguates
/// affirm/negate (which refer to a preceding confirm) and tells the tracker
/// which requested slots were just answered.
pub fn evidence_from_act(
    ontology: &Ontology,
    act: &DialogueAct,
    context: Option<&DialogueAct>,
) -> TurnEvidence {
    let conf = act.confidence.clamp(0.0, 1.0);
    let mut ev = TurnEvidence {
        act_type: Some(act.act_type),
        ..Default::default()
    };
    if let Some(sys) = context {
        if sys.act_type == ActType::Inform {
            ev.answered = sys
                .items
                .iter()
                .filter(|i| ontology.is_requestable(&i.slot))
                .map(|i| i.slot.clone())
                .collect();
        }
    }
    let confirmed = context
        .filter(|sys| sys.act_type == ActType::Confirm)
        .and_then(|sys| sys.items.first())
        .and_then(|item| Some((item.slot.as_str(), item.value.as_deref()?)));

    match act.act_type {
        ActType::Inform => add_values(ontology, act, conf, &mut ev),
        ActType::Request => {
            for item in &act.items {
                if ontology.is_requestable(&item.slot) {
                    ev.requests.push(item.slot.clone());
                } else {
                    warn!("ignoring request for unknown slot `{}`", item.slot);
                }
            }
        }
        ActType::Affirm => match confirmed {
            Some((slot, value)) => {
                if known(ontology, slot, value) {
                    ev.add_mass(slot, value, conf);
                }
                add_values(ontology, act, conf, &mut ev);
            }
            None => {
                warn!("affirm without a preceding confirm; treating as null");
                ev.act_type = Some(ActType::Null);
            }
        },
        ActType::Negate => {
            if act.items.iter().any(|i| i.value.is_some()) {
                add_values(ontology, act, conf, &mut ev);
            } else if let Some((slot, value)) = confirmed {
                if let Some(si) = ontology.slot_index(slot) {
                    let others: Vec<&str> = ontology
                        .slot(si)
                        .values
                        .iter()
                        .map(String::as_str)
                        .filter(|v| *v != value)
                        .collect();
                    let share = conf / others.len() as f64;
                    for v in others {
                        ev.add_mass(slot, v, share);
                    }
                }
            } else {
                warn!("negate without a preceding confirm; treating as null");
                ev.act_type = Some(ActType::Null);
            }
        }
        _ => {}
    }
    ev
}

fn known(ontology: &Ontology, slot: &str, value: &str) -> bool {
    ontology.slot_index(slot).is_some() && (value == DONTCARE || ontology.has_value(slot, value))
}

/// Adds `conf` mass per informed value; several values for one slot share it.
fn add_values(ontology: &Ontology, act: &DialogueAct, conf: f64, ev: &mut TurnEvidence) {
    let valued: Vec<(&str, &str)> = act
        .items
        .iter()
        .filter_map(|i| Some((i.slot.as_str(), i.value.as_deref()?)))
        .filter(|(s, v)| {
            let ok = known(ontology, s, v);
            if !ok && ontology.slot_index(s).is_some() {
                warn!("ignoring unknown value `{v}` for slot `{s}`");
            }
            ok
        })
        .collect();
    for &(slot, value) in &valued {
        let n = valued.iter().filter(|(s, _)| *s == slot).count();
        ev.add_mass(slot, value, conf / n as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;

    fn cr() -> Ontology {
        Domain::cambridge_restaurants().ontology
    }

    fn mass(ev: &TurnEvidence, slot: &str, value: &str) -> f64 {
        ev.slot_mass
            .get(slot)
            .and_then(|m| m.get(value))
            .copied()
            .unwrap_or(0.0)
    }

    #[test]
    fn inform_puts_confidence_on_value() {
        let o = cr();
        let act = DialogueAct::inform_one("pricerange", "cheap").with_confidence(0.5);
        let ev = evidence_from_act(&o, &act, None);
        assert_eq!(mass(&ev, "pricerange", "cheap"), 0.5);
        assert_eq!(ev.total_mass("pricerange"), 0.5);
    }

    #[test]
    fn affirm_after_confirm() {
        let o = cr();
        let sys = DialogueAct::confirm("pricerange", "cheap");
        let act = DialogueAct::bare(ActType::Affirm).with_confidence(0.9);
        let ev = evidence_from_act(&o, &act, Some(&sys));
        assert_eq!(mass(&ev, "pricerange", "cheap"), 0.9);
        assert_eq!(ev.total_mass("pricerange"), 0.9);
    }

    #[test]
    fn bare_negate_spreads_uniformly() {
        let o = cr();
        let sys = DialogueAct::confirm("area", "north");
        let act = DialogueAct::bare(ActType::Negate).with_confidence(0.6);
        let ev = evidence_from_act(&o, &act, Some(&sys));
        for v in ["south", "east", "west", "centre"] {
            assert!((mass(&ev, "area", v) - 0.15).abs() < 1e-12);
        }
        assert_eq!(mass(&ev, "area", "north"), 0.0);
        assert_eq!(mass(&ev, "area", DONTCARE), 0.0);
    }

    #[test]
    fn negate_with_correction() {
        let o = cr();
        let sys = DialogueAct::confirm("area", "north");
        let act = DialogueAct::new(
            ActType::Negate,
            vec![crate::domain::ActItem::new("area", "south")],
        )
        .with_confidence(0.8);
        let ev = evidence_from_act(&o, &act, Some(&sys));
        assert_eq!(mass(&ev, "area", "south"), 0.8);
        assert_eq!(ev.total_mass("area"), 0.8);
    }

    #[test]
    fn affirm_without_context_is_null() {
        let o = cr();
        let act = DialogueAct::bare(ActType::Affirm).with_confidence(0.9);
        let ev = evidence_from_act(&o, &act, None);
        assert!(ev.slot_mass.is_empty());
        assert_eq!(ev.act_type, Some(ActType::Null));
    }

    #[test]
    fn requests_and_answers() {
        let o = cr();
        let act = DialogueAct::request("phone");
        let sys = DialogueAct::inform(vec![
            crate::domain::ActItem::new("name", "x"),
            crate::domain::ActItem::new("address", "1 Mill Road"),
        ]);
        let ev = evidence_from_act(&o, &act, Some(&sys));
        assert_eq!(ev.requests, vec!["phone".to_string()]);
        assert_eq!(ev.answered, vec!["address".to_string()]);
    }

    #[test]
    fn null_is_empty() {
        let ev = evidence_from_act(&cr(), &DialogueAct::null(), None);
        assert!(ev.slot_mass.is_empty() && ev.requests.is_empty());
    }
}
