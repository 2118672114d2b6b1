//! HTTP service for human trials of trained dialogue policies.
//!
//! Text comes in through a rule-based NLU, the policy acts on the tracked
//! belief in evaluation mode with action masks on, and template NLG renders
//! the reply. Finished dialogues are rated with a short questionnaire that is
//! appended, with the transcript, to a JSON-lines log.

pub mod error;
pub mod http;
pub mod nlg;
pub mod nlu;
pub mod session;
pub mod store;

use std::path::Path;

use feudalgain::feudal::Checkpoint;
use feudalgain::Domain;

pub use error::{ServiceError, ServiceResult};
pub use http::{router, serve};
pub use nlg::Templates;
pub use nlu::RuleNlu;
pub use session::{PolicyEntry, Questionnaire, SessionStatus, SummaryRow, TrialService};
pub use store::{QuestionnaireRecord, RecordLog};

/// Bundled domain whose ontology is called `name`.
pub fn domain_for_ontology(name: &str) -> Option<Domain> {
    [Domain::cambridge_restaurants(), Domain::sf_restaurants()]
        .into_iter()
        .find(|d| d.ontology.name() == name)
}

/// Resolves one `--checkpoint` argument.
///
/// Accepts `id=path`, a bare path (the id is the file stem), or the built-in
/// names `scripted-oracle` and `always-bye`. Learned checkpoints run on the
/// domain they were trained on; built-ins use `default_domain`.
pub fn load_policy(spec: &str, default_domain: &str) -> ServiceResult<PolicyEntry> {
    let default = || {
        Domain::by_name(default_domain)
            .ok_or_else(|| ServiceError::Config(format!("unknown domain `{default_domain}`")))
    };
    let builtin = match spec {
        "scripted-oracle" => Some(Checkpoint::ScriptedOracle),
        "always-bye" => Some(Checkpoint::AlwaysBye),
        _ => None,
    };
    if let Some(cp) = builtin {
        return PolicyEntry::new(spec, cp, default()?);
    }
    let (id, path) = match spec.split_once('=') {
        Some((id, path)) => (id.to_string(), Path::new(path)),
        None => {
            let path = Path::new(spec);
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec);
            (stem.to_string(), path)
        }
    };
    let cp = Checkpoint::load(path)?;
    let domain = match &cp {
        Checkpoint::Learned(p) => domain_for_ontology(&p.domain).ok_or_else(|| {
            ServiceError::Config(format!("checkpoint domain `{}` is not bundled", p.domain))
        })?,
        _ => default()?,
    };
    PolicyEntry::new(id, cp, domain)
}
