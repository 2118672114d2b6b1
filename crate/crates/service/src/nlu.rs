//! Rule-based NLU: keyword and value tables built from the ontology.
//!
//! Values and their synonyms are matched as whole-word phrases. An exact
//! match yields confidence 1.0; a match within a small edit distance yields
//! 0.7. Anything that matches nothing parses to `null`.

use feudalgain::domain::{ActItem, ActType, DialogueAct, Ontology, DONTCARE};

pub const EXACT_CONFIDENCE: f64 = 1.0;
pub const FUZZY_CONFIDENCE: f64 = 0.7;

const HELLO: &[&str] = &["hi", "hello", "hey"];
const BYE: &[&str] = &["bye", "goodbye", "that's all", "that is all", "good bye"];
const AFFIRM: &[&str] = &["yes", "yeah", "yep", "correct", "right", "sure", "exactly"];
const NEGATE: &[&str] = &["no", "nope", "not", "wrong", "incorrect"];
const DONTCARE_CUES: &[&str] = &[
    "don't care",
    "do not care",
    "doesn't matter",
    "does not matter",
    "any",
    "anything",
    "whatever",
];
const QUESTION_CUES: &[&str] = &["what", "which", "where", "how", "tell me", "give me"];

/// Aliases for slot names when the user asks for them.
fn slot_keywords(slot: &str) -> Vec<String> {
    let extra: &[&str] = match slot {
        "pricerange" => &["price range", "price"],
        "area" => &["area", "part of town", "location"],
        "food" => &["food", "cuisine"],
        "phone" => &["phone", "phone number", "telephone", "number"],
        "address" => &["address", "where is it", "located"],
        "postcode" => &["postcode", "post code", "postal code", "zip"],
        "kidsallowed" => &["kids", "children"],
        "goodformeal" => &["meal"],
        "near" => &["near", "nearby"],
        "price" => &["price", "cost"],
        _ => &[],
    };
    let mut out = vec![slot.to_string()];
    out.extend(extra.iter().map(|s| s.to_string()));
    out
}

#[derive(Debug, Clone)]
struct Pattern {
    slot: String,
    value: String,
    words: Vec<String>,
}

/// Result of parsing one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct Parse {
    pub act: DialogueAct,
    /// Requests that accompany a non-request act ("yes, and the address?").
    pub extra_requests: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RuleNlu {
    patterns: Vec<Pattern>,
    requestable: Vec<(String, Vec<Vec<String>>)>,
    informable: Vec<String>,
}

fn normalise(text: &str) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '\'' {
                c
            } else {
                ' '
            }
        })
        .collect();
    cleaned.split_whitespace().map(str::to_string).collect()
}

fn find_phrase(tokens: &[String], phrase: &[String], used: &[bool]) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - phrase.len()).find(|&i| {
        tokens[i..i + phrase.len()] == *phrase && !used[i..i + phrase.len()].iter().any(|u| *u)
    })
}

fn contains_any(tokens: &[String], cues: &[&str]) -> bool {
    let none = vec![false; tokens.len()];
    cues.iter()
        .any(|c| find_phrase(tokens, &normalise(c), &none).is_some())
}

fn claim(slot: &str, value: &str, items: &mut Vec<ActItem>) {
    if !items.iter().any(|i| i.slot == slot) {
        items.push(ActItem::new(slot, value));
    }
}

fn fuzzy_close(a: &str, b: &str) -> bool {
    let len = a.chars().count().min(b.chars().count());
    let allowed = match len {
        0..=4 => 0,
        5..=7 => 1,
        _ => 2,
    };
    allowed > 0 && strsim::damerau_levenshtein(a, b) <= allowed
}

impl RuleNlu {
    pub fn new(ontology: &Ontology) -> Self {
        let mut patterns = Vec::new();
        for slot in ontology.informable() {
            for value in &slot.values {
                patterns.push(Pattern {
                    slot: slot.name.clone(),
                    value: value.clone(),
                    words: normalise(value),
                });
            }
            for (value, synonyms) in &slot.synonyms {
                for s in synonyms {
                    patterns.push(Pattern {
                        slot: slot.name.clone(),
                        value: value.clone(),
                        words: normalise(s),
                    });
                }
            }
        }
        // Longest phrases claim their words first.
        patterns.sort_by_key(|p| std::cmp::Reverse(p.words.len()));
        let requestable = ontology
            .requestable()
            .iter()
            .map(|r| {
                let kws = slot_keywords(r).iter().map(|k| normalise(k)).collect();
                (r.clone(), kws)
            })
            .collect();
        let informable = ontology
            .informable()
            .iter()
            .map(|s| s.name.clone())
            .collect();
        Self {
            patterns,
            requestable,
            informable,
        }
    }

    /// Parses `text` given the system act it answers.
    pub fn parse(&self, text: &str, context: Option<&DialogueAct>) -> Parse {
        let tokens = normalise(text);
        let mut used = vec![false; tokens.len()];
        let mut items: Vec<ActItem> = Vec::new();
        let mut fuzzy = false;

        for p in &self.patterns {
            while let Some(at) = find_phrase(&tokens, &p.words, &used) {
                used[at..at + p.words.len()]
                    .iter_mut()
                    .for_each(|u| *u = true);
                claim(&p.slot, &p.value, &mut items);
            }
        }
        for p in &self.patterns {
            let n = p.words.len();
            if n == 0 || n > tokens.len() || items.iter().any(|i| i.slot == p.slot) {
                continue;
            }
            let target = p.words.join(" ");
            for i in 0..=tokens.len() - n {
                if used[i..i + n].iter().any(|u| *u) {
                    continue;
                }
                if fuzzy_close(&tokens[i..i + n].join(" "), &target) {
                    used[i..i + n].iter_mut().for_each(|u| *u = true);
                    claim(&p.slot, &p.value, &mut items);
                    fuzzy = true;
                    break;
                }
            }
        }

        let asked = context
            .filter(|a| a.act_type == ActType::Request)
            .and_then(|a| a.items.first())
            .map(|i| i.slot.as_str())
            .filter(|s| self.informable.iter().any(|x| x == s));
        if let Some(slot) = asked {
            if !items.iter().any(|i| i.slot == slot) && contains_any(&tokens, DONTCARE_CUES) {
                items.push(ActItem::new(slot, DONTCARE));
            }
        }

        let question = contains_any(&tokens, QUESTION_CUES) || text.contains('?');
        let mut requests = Vec::new();
        for (slot, keywords) in &self.requestable {
            let informable = self.informable.iter().any(|s| s == slot);
            if informable && (!question || items.iter().any(|i| &i.slot == slot)) {
                continue;
            }
            let hit = keywords
                .iter()
                .any(|k| find_phrase(&tokens, k, &used).is_some());
            if hit {
                requests.push(slot.clone());
            }
        }

        let confidence = if fuzzy {
            FUZZY_CONFIDENCE
        } else {
            EXACT_CONFIDENCE
        };
        let first = tokens.first().map(String::as_str).unwrap_or("");
        let confirm_context = context.is_some_and(|a| a.act_type == ActType::Confirm);
        let act_type = if NEGATE.contains(&first) && (confirm_context || !items.is_empty()) {
            ActType::Negate
        } else if AFFIRM.contains(&first) && confirm_context {
            ActType::Affirm
        } else if !items.is_empty() {
            ActType::Inform
        } else if !requests.is_empty() {
            ActType::Request
        } else if contains_any(&tokens, BYE) {
            ActType::Bye
        } else if tokens.iter().all(|t| HELLO.contains(&t.as_str())) && !tokens.is_empty() {
            ActType::Hello
        } else if AFFIRM.contains(&first) {
            ActType::Affirm
        } else {
            ActType::Null
        };

        let (act, extra_requests) = match act_type {
            ActType::Request => (
                DialogueAct::new(
                    ActType::Request,
                    requests.iter().map(ActItem::slot_only).collect(),
                ),
                Vec::new(),
            ),
            ActType::Inform | ActType::Negate | ActType::Affirm => {
                (DialogueAct::new(act_type, items), requests)
            }
            _ => (DialogueAct::bare(act_type), Vec::new()),
        };
        Parse {
            act: act.with_confidence(confidence),
            extra_requests,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use feudalgain::domain::Domain;

    fn nlu() -> RuleNlu {
        RuleNlu::new(&Domain::cambridge_restaurants().ontology)
    }

    #[test]
    fn exact_and_synonym_values() {
        let p = nlu().parse("I want cheap food in the city centre", None);
        assert_eq!(p.act.act_type, ActType::Inform);
        assert_eq!(p.act.value_of("pricerange"), Some("cheap"));
        assert_eq!(p.act.value_of("area"), Some("centre"));
        assert_eq!(p.act.confidence, EXACT_CONFIDENCE);
    }

    #[test]
    fn misspelling_is_fuzzy() {
        let p = nlu().parse("some chinnese food", None);
        assert_eq!(p.act.value_of("food"), Some("chinese"));
        assert_eq!(p.act.confidence, FUZZY_CONFIDENCE);
    }

    #[test]
    fn short_words_never_fuzzy_match() {
        assert_eq!(nlu().parse("the ease", None).act.act_type, ActType::Null);
        assert_eq!(nlu().parse("I want that", None).act.act_type, ActType::Null);
    }

    #[test]
    fn dontcare_answers_the_asked_slot() {
        let ctx = DialogueAct::request("area");
        let p = nlu().parse("I don't care", Some(&ctx));
        assert_eq!(p.act.value_of("area"), Some(DONTCARE));
        let p = nlu().parse("any part of town is fine", None);
        assert_eq!(p.act.value_of("area"), Some(DONTCARE));
    }

    #[test]
    fn affirm_with_request() {
        let ctx = DialogueAct::confirm("pricerange", "cheap");
        let p = nlu().parse("Yes. I need the address.", Some(&ctx));
        assert_eq!(p.act.act_type, ActType::Affirm);
        assert_eq!(p.extra_requests, vec!["address".to_string()]);
    }

    #[test]
    fn negate_with_correction() {
        let ctx = DialogueAct::confirm("area", "north");
        let p = nlu().parse("no, the south", Some(&ctx));
        assert_eq!(p.act.act_type, ActType::Negate);
        assert_eq!(p.act.value_of("area"), Some("south"));
        let bare = nlu().parse("no", Some(&ctx));
        assert_eq!(bare.act.act_type, ActType::Negate);
        assert!(bare.act.items.is_empty());
    }

    #[test]
    fn requests_and_questions() {
        let p = nlu().parse("what is the phone number and postcode?", None);
        assert_eq!(p.act.act_type, ActType::Request);
        let slots: Vec<&str> = p.act.items.iter().map(|i| i.slot.as_str()).collect();
        assert_eq!(slots, ["phone", "postcode"]);
        let p = nlu().parse("what area is it in", None);
        assert_eq!(p.act.act_type, ActType::Request);
        assert_eq!(p.act.items[0].slot, "area");
    }

    #[test]
    fn bye_hello_and_null() {
        assert_eq!(
            nlu().parse("thanks, goodbye", None).act.act_type,
            ActType::Bye
        );
        assert_eq!(nlu().parse("Hello!", None).act.act_type, ActType::Hello);
        assert_eq!(nlu().parse("blorp zzz", None).act.act_type, ActType::Null);
        assert_eq!(nlu().parse("", None).act.act_type, ActType::Null);
    }
}
