//! Trial sessions: one live dialogue between a person and a loaded policy.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::{SystemTime, UNIX_EPOCH};

use feudalgain::belief::{evidence_from_act, focus_update, initial_belief};
use feudalgain::dialogue::{render_system_act, SelectionMode};
use feudalgain::domain::{DialogueAct, GeneralAction, SystemAction};
use feudalgain::feudal::Checkpoint;
use feudalgain::harness::mean_std;
use feudalgain::rng::{from_seed, DialogueRng};
use feudalgain::{BeliefState, DialoguePolicy, Domain};
use serde::{Deserialize, Serialize};

use crate::error::{ServiceError, ServiceResult};
use crate::nlg::Templates;
use crate::nlu::RuleNlu;
use crate::store::{QuestionnaireRecord, RecordLog};

pub const MAX_TURNS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Active,
    AwaitingQuestionnaire,
    Closed,
}

impl SessionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SessionStatus::Active => "active",
            SessionStatus::AwaitingQuestionnaire => "awaiting_questionnaire",
            SessionStatus::Closed => "closed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptTurn {
    pub user_text: String,
    pub user_act: DialogueAct,
    pub system_act: DialogueAct,
    pub system_text: String,
}

/// Belief summary and chosen act returned with a turn when asked for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnDebug {
    pub user_act: String,
    pub action: String,
    pub system_act: String,
    pub belief: Vec<SlotSummary>,
    pub requested: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotSummary {
    pub slot: String,
    pub top: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurnReply {
    pub system_text: String,
    pub status: SessionStatus,
    pub debug: TurnDebug,
}

/// A policy the trial can serve, with the language components of its domain.
pub struct PolicyEntry {
    pub id: String,
    pub checkpoint: Checkpoint,
    pub domain: Domain,
    pub nlu: RuleNlu,
    pub templates: Templates,
}

impl PolicyEntry {
    /// Builds an entry, checking that the checkpoint instantiates on `domain`.
    pub fn new(
        id: impl Into<String>,
        checkpoint: Checkpoint,
        domain: Domain,
    ) -> ServiceResult<Self> {
        checkpoint.to_policy(&domain)?;
        let templates = Templates::for_ontology(domain.ontology.name());
        Ok(Self {
            id: id.into(),
            nlu: RuleNlu::new(&domain.ontology),
            templates,
            checkpoint,
            domain,
        })
    }

    pub fn with_templates(mut self, templates: Templates) -> Self {
        self.templates = templates;
        self
    }
}

struct Session {
    policy: Arc<PolicyEntry>,
    runner: Box<dyn DialoguePolicy + Send>,
    rng: DialogueRng,
    belief: BeliefState,
    last_system_act: Option<DialogueAct>,
    transcript: Vec<TranscriptTurn>,
    status: SessionStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Questionnaire {
    pub success: bool,
    pub ask_if_nec: u8,
    pub overall: u8,
}

impl Questionnaire {
    pub fn validate(&self) -> ServiceResult<()> {
        for (name, v) in [("ask_if_nec", self.ask_if_nec), ("overall", self.overall)] {
            if !(1..=5).contains(&v) {
                return Err(ServiceError::Validation(format!(
                    "{name} must be between 1 and 5, got {v}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    fn of(xs: &[f64]) -> Self {
        let (mean, std) = mean_std(xs);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub policy: String,
    pub dialogues: usize,
    pub success: MeanStd,
    pub turns: MeanStd,
    pub ask_if_nec: MeanStd,
    pub overall: MeanStd,
}

/// Sessions, loaded policies and the record log.
pub struct TrialService {
    policies: Vec<Arc<PolicyEntry>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
    records: Mutex<Vec<QuestionnaireRecord>>,
    log: RecordLog,
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn session_seed(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

impl TrialService {
    /// Opens the record log at `log_path`; records already in it count towards the summary.
    pub fn new(policies: Vec<PolicyEntry>, log_path: impl Into<PathBuf>) -> ServiceResult<Self> {
        if policies.is_empty() {
            return Err(ServiceError::Config("no policies configured".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &policies {
            if !seen.insert(p.id.clone()) {
                return Err(ServiceError::Config(format!(
                    "duplicate policy id `{}`",
                    p.id
                )));
            }
        }
        let log = RecordLog::open(log_path.into())?;
        let records = log.read_all()?;
        Ok(Self {
            policies: policies.into_iter().map(Arc::new).collect(),
            sessions: Mutex::new(HashMap::new()),
            records: Mutex::new(records),
            log,
        })
    }

    pub fn policy_ids(&self) -> Vec<String> {
        self.policies.iter().map(|p| p.id.clone()).collect()
    }

    pub fn log(&self) -> &RecordLog {
        &self.log
    }

    /// Starts a dialogue; returns the session id and greeting.
    pub fn create_session(&self, policy_id: &str) -> ServiceResult<(String, String)> {
        let policy = self
            .policies
            .iter()
            .find(|p| p.id == policy_id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownPolicy(policy_id.to_string()))?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Session {
            runner: policy.checkpoint.to_policy(&policy.domain)?,
            rng: from_seed(session_seed(&id)),
            belief: initial_belief(&policy.domain.ontology),
            last_system_act: None,
            transcript: Vec::new(),
            status: SessionStatus::Active,
            policy,
        };
        let greeting = session.policy.templates.greeting();
        lock(&self.sessions).insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok((id, greeting))
    }

    fn session(&self, id: &str) -> ServiceResult<Arc<Mutex<Session>>> {
        lock(&self.sessions)
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn status(&self, id: &str) -> ServiceResult<SessionStatus> {
        let handle = self.session(id)?;
        let status = lock(&handle).status;
        Ok(status)
    }

    /// Parses `text`, updates the belief and returns the policy's reply.
    pub fn user_turn(&self, id: &str, text: &str) -> ServiceResult<TurnReply> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        if s.status != SessionStatus::Active {
            return Err(ServiceError::WrongStatus(s.status.as_str()));
        }
        let policy = Arc::clone(&s.policy);
        let ontology = &policy.domain.ontology;
        let parse = policy.nlu.parse(text, s.last_system_act.as_ref());
        let mut evidence = evidence_from_act(ontology, &parse.act, s.last_system_act.as_ref());
        for r in parse.extra_requests {
            if !evidence.requests.contains(&r) {
                evidence.requests.push(r);
            }
        }
        let mut belief = focus_update(ontology, &s.belief, &evidence)?;

        let user_bye = parse.act.act_type == feudalgain::ActType::Bye;
        let action = if user_bye || s.transcript.len() + 1 >= MAX_TURNS {
            SystemAction::General(GeneralAction::Bye)
        } else {
            let Session { runner, rng, .. } = &mut *s;
            runner
                .decide(&belief, &policy.domain, true, SelectionMode::Eval, rng)
                .action
        };
        let (system_act, offered) = render_system_act(action, &belief, &policy.domain);
        belief.record_system_action(action, offered);
        let system_text = policy.templates.render(&system_act);

        let debug = TurnDebug {
            user_act: parse.act.to_string(),
            action: action.label(ontology),
            system_act: system_act.to_string(),
            belief: belief
                .slots
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let top = d.argmax();
                    SlotSummary {
                        slot: d.slot.clone(),
                        top: ontology.support_value(i, top).to_string(),
                        prob: d.probs[top],
                    }
                })
                .collect(),
            requested: belief.requested.iter().cloned().collect(),
        };
        s.transcript.push(TranscriptTurn {
            user_text: text.to_string(),
            user_act: parse.act,
            system_act: system_act.clone(),
            system_text: system_text.clone(),
        });
        s.belief = belief;
        s.last_system_act = Some(system_act);
        if action == SystemAction::General(GeneralAction::Bye) {
            s.status = SessionStatus::AwaitingQuestionnaire;
        }
        Ok(TurnReply {
            system_text,
            status: s.status,
            debug,
        })
    }

    /// Persists the questionnaire with the transcript and closes the session.
    pub fn submit_questionnaire(&self, id: &str, q: Questionnaire) -> ServiceResult<()> {
        let handle = self.session(id)?;
        let mut s = lock(&handle);
        match s.status {
            SessionStatus::Closed => return Err(ServiceError::AlreadySubmitted),
            SessionStatus::Active => return Err(ServiceError::WrongStatus("active")),
            SessionStatus::AwaitingQuestionnaire => {}
        }
        q.validate()?;
        let record = QuestionnaireRecord {
            session_id: id.to_string(),
            policy: s.policy.id.clone(),
            success: q.success,
            ask_if_nec: q.ask_if_nec,
            overall: q.overall,
            timestamp_ms: now_ms(),
            turns: s.transcript.len(),
            transcript: s.transcript.clone(),
        };
        self.log.append(&record)?;
        lock(&self.records).push(record);
        s.status = SessionStatus::Closed;
        Ok(())
    }

    /// Mean and standard deviation per policy id, sorted by id.
    pub fn summary(&self) -> ServiceResult<Vec<SummaryRow>> {
        let records = lock(&self.records);
        if records.is_empty() {
            return Err(ServiceError::NoData);
        }
        let mut groups: std::collections::BTreeMap<&str, Vec<&QuestionnaireRecord>> =
            Default::default();
        for r in records.iter() {
            groups.entry(r.policy.as_str()).or_default().push(r);
        }
        Ok(groups
            .into_iter()
            .map(|(policy, rs)| {
                let col = |f: &dyn Fn(&QuestionnaireRecord) -> f64| {
                    MeanStd::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>())
                };
                SummaryRow {
                    policy: policy.to_string(),
                    dialogues: rs.len(),
                    success: col(&|r| r.success as u8 as f64),
                    turns: col(&|r| r.turns as f64),
                    ask_if_nec: col(&|r| r.ask_if_nec as f64),
                    overall: col(&|r| r.overall as f64),
                }
            })
            .collect())
    }
}
