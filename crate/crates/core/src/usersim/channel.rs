use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ActType, DialogueAct, Ontology, DONTCARE};

/// Which corruption the channel applied, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corruption {
    None,
    /// One value replaced by another value of the same slot.
    Substitute,
    /// The whole act dropped to `null`.
    Drop,
    /// `affirm` and `negate` swapped.
    Flip,
    /// A corruption was drawn but does not apply to this act.
    Inapplicable,
}

/// Semantic error channel.
///
/// With probability `1 - error_rate` the act passes through with confidence
/// drawn from `U(0.6, 1.0)`. Otherwise one of three corruptions is drawn
/// uniformly and the confidence comes from `U(0.2, 0.7)`.
pub fn corrupt<R: Rng + ?Sized>(
    act: &DialogueAct,
    error_rate: f64,
    ontology: &Ontology,
    rng: &mut R,
) -> (DialogueAct, Corruption) {
    if rng.random::<f64>() >= error_rate {
        let conf = rng.random_range(0.6..=1.0);
        return (act.clone().with_confidence(conf), Corruption::None);
    }
    let mut out = act.clone();
    let kind = match rng.random_range(0..3) {
        0 => {
            let candidates: Vec<usize> = out
                .items
                .iter()
                .enumerate()
                .filter(|(_, i)| i.value.is_some() && ontology.slot_index(&i.slot).is_some())
                .map(|(k, _)| k)
                .collect();
            match candidates.choose(rng) {
                Some(&k) => {
                    let item = &mut out.items[k];
                    let si = ontology.slot_index(&item.slot).unwrap();
                    let current = item.value.clone().unwrap();
                    let alternatives: Vec<&str> = ontology
                        .slot(si)
                        .values
                        .iter()
                        .map(String::as_str)
                        .chain(std::iter::once(DONTCARE))
                        .filter(|v| *v != current)
                        .collect();
                    item.value = Some(alternatives.choose(rng).unwrap().to_string());
                    Corruption::Substitute
                }
                None => Corruption::Inapplicable,
            }
        }
        1 => {
            out = DialogueAct::null();
            Corruption::Drop
        }
        _ => match out.act_type {
            ActType::Affirm => {
                out = DialogueAct::bare(ActType::Negate);
                Corruption::Flip
            }
            ActType::Negate => {
                out = DialogueAct::bare(ActType::Affirm);
                Corruption::Flip
            }
            _ => Corruption::Inapplicable,
        },
    };
    let conf = rng.random_range(0.2..=0.7);
    (out.with_confidence(conf), kind)
}
