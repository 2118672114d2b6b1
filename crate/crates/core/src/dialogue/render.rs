use crate::belief::BeliefState;
use crate::domain::{
    ActItem, ActType, DialogueAct, Domain, Entity, GeneralAction, InfoKind, SystemAction, DONTCARE,
    ENTITY_NAME, NONE,
};

/// Turns an action id into a concrete system act, querying the database for
/// offers. Returns the act and the name of any entity it offers.
pub fn render_system_act(
    action: SystemAction,
    belief: &BeliefState,
    domain: &Domain,
) -> (DialogueAct, Option<String>) {
    let ontology = &domain.ontology;
    match action {
        SystemAction::Info { kind, slot } => {
            let name = ontology.slot(slot).name.as_str();
            let dist = belief.slot(slot);
            let act = match kind {
                InfoKind::Request => DialogueAct::request(name),
                InfoKind::Confirm => {
                    let (top, _) = dist.top_informative();
                    DialogueAct::confirm(name, ontology.support_value(slot, top))
                }
                InfoKind::Select => {
                    let values: Vec<&str> = dist
                        .top_values(2)
                        .into_iter()
                        .map(|i| ontology.support_value(slot, i))
                        .collect();
                    DialogueAct::select(name, &values)
                }
            };
            (act, None)
        }
        SystemAction::General(GeneralAction::Inform) => offer(belief, domain, false),
        SystemAction::General(GeneralAction::InformAlternatives) => offer(belief, domain, true),
        SystemAction::General(GeneralAction::Reqmore) => {
            (DialogueAct::bare(ActType::Reqmore), None)
        }
        SystemAction::General(GeneralAction::Bye) => (DialogueAct::bare(ActType::Bye), None),
        SystemAction::General(GeneralAction::Repeat) => (DialogueAct::bare(ActType::Repeat), None),
        SystemAction::Pass => (DialogueAct::bare(ActType::Pass), None),
    }
}

fn offer(
    belief: &BeliefState,
    domain: &Domain,
    alternative: bool,
) -> (DialogueAct, Option<String>) {
    let ontology = &domain.ontology;
    let constraints = belief.constraints(ontology);
    let matches: Vec<&Entity> = domain
        .db
        .entities
        .iter()
        .filter(|e| e.satisfies(constraints.iter().copied()))
        .collect();
    let current = belief.offered_entity.as_deref();
    let position = current.and_then(|c| matches.iter().position(|e| e.name() == c));
    let chosen = match (alternative, position) {
        (false, Some(i)) => Some(matches[i]),
        (true, Some(i)) if matches.len() > 1 => Some(matches[(i + 1) % matches.len()]),
        _ => matches.first().copied(),
    };
    let Some(entity) = chosen else {
        let mut items = vec![ActItem::new(ENTITY_NAME, NONE)];
        items.extend(
            constraints
                .iter()
                .filter(|(_, v)| *v != DONTCARE)
                .map(|(s, v)| ActItem::new(*s, *v)),
        );
        return (DialogueAct::inform(items), None);
    };
    let mut items = vec![ActItem::new(ENTITY_NAME, entity.name())];
    for (slot, value) in &constraints {
        if *value != DONTCARE {
            items.push(ActItem::new(*slot, entity.get(slot).unwrap_or_default()));
        }
    }
    for slot in &belief.requested {
        if items.iter().any(|i| &i.slot == slot) {
            continue;
        }
        if let Some(v) = entity.get(slot) {
            items.push(ActItem::new(slot.clone(), v));
        }
    }
    (DialogueAct::inform(items), Some(entity.name().to_string()))
}
