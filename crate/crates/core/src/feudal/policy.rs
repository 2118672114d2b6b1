use ndarray::ArrayView2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::acer::{masked_softmax, AcerConfig, AcerLearner};
use super::checkpoint::{LearnedPolicy, CHECKPOINT_FORMAT};
use super::dqn::{DqnConfig, DqnLearner};
use super::features::{belief_features, BeliefFeatures, FeatureLayout};
use super::masks::{apply_masks, ActionMask};
use super::transitions::build_transitions;
use super::{
    masked_argmax, sample_index, Architecture, Variant, GENERAL_PASS, MASTER_GENERAL, MASTER_INFO,
    MERGED_INFO,
};
use crate::belief::BeliefState;
use crate::dialogue::{
    Decision, DialoguePolicy, Episode, PolicyTrace, SelectionMode, SoftmaxChoice, DEFAULT_MAX_TURNS,
};
use crate::domain::{Domain, GeneralAction, InfoKind, SystemAction};
use crate::error::{Error, Result};
use crate::reward::RewardConfig;
use crate::rng::DialogueRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig {
    pub dqn: DqnConfig,
    pub acer: AcerConfig,
    /// ε-greedy schedule for π_i without noisy networks: linear from
    /// `epsilon_start` to `epsilon_end` over `epsilon_dialogues`.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_dialogues: u64,
    pub max_turns: usize,
    pub reward: RewardConfig,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            dqn: DqnConfig::default(),
            acer: AcerConfig::default(),
            epsilon_start: 0.3,
            epsilon_end: 0.05,
            epsilon_dialogues: 4000,
            max_turns: DEFAULT_MAX_TURNS,
            reward: RewardConfig::default(),
        }
    }
}

/// What one call to [`PolicySet::learn`] did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LearnStats {
    pub slot_transitions: usize,
    /// Mean batch loss of the π_i updates, if any ran.
    pub pi_i_loss: Option<f64>,
    /// Mean critic loss over the actor-critic learners.
    pub acer_loss: f64,
}

/// All trainable policies of one variant.
#[derive(Debug, Clone)]
pub struct PolicySet {
    variant: Variant,
    cfg: PolicyConfig,
    layout: FeatureLayout,
    domain: String,
    pub pi_i: DqnLearner,
    merged: Option<AcerLearner>,
    master: Option<AcerLearner>,
    general: Option<AcerLearner>,
    dialogues: u64,
}

impl PolicySet {
    pub fn new(
        variant: Variant,
        cfg: PolicyConfig,
        domain: &Domain,
        rng: &mut DialogueRng,
    ) -> Result<Self> {
        variant.validate()?;
        let layout = FeatureLayout::new(domain, cfg.max_turns);
        let pi_i = DqnLearner::new(
            layout.slot_dim(),
            variant.slot_actions(),
            variant.noisy,
            cfg.dqn.clone(),
            rng,
        );
        let acer = |n, rng: &mut DialogueRng| {
            AcerLearner::new(layout.master_dim(), n, variant.noisy, cfg.acer.clone(), rng)
        };
        let (merged, master, general) = match variant.architecture {
            Architecture::Merged => (Some(acer(MERGED_INFO + 1, rng)), None, None),
            Architecture::Feudal => (None, Some(acer(2, rng)), Some(acer(GENERAL_PASS + 1, rng))),
        };
        Ok(Self {
            variant,
            layout,
            domain: domain.ontology.name().to_string(),
            pi_i,
            merged,
            master,
            general,
            dialogues: 0,
            cfg,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.cfg
    }

    pub fn layout(&self) -> &FeatureLayout {
        &self.layout
    }

    pub fn domain_name(&self) -> &str {
        &self.domain
    }

    pub fn dialogues_trained(&self) -> u64 {
        self.dialogues
    }

    /// Current ε for π_i; only used without noisy networks.
    pub fn epsilon(&self) -> f64 {
        let frac = if self.cfg.epsilon_dialogues == 0 {
            1.0
        } else {
            (self.dialogues as f64 / self.cfg.epsilon_dialogues as f64).min(1.0)
        };
        self.cfg.epsilon_start + (self.cfg.epsilon_end - self.cfg.epsilon_start) * frac
    }

    /// Learns from one finished training episode.
    pub fn learn(
        &mut self,
        episode: &Episode,
        domain: &Domain,
        masks: bool,
        rng: &mut DialogueRng,
    ) -> Result<LearnStats> {
        let t = build_transitions(
            episode,
            &self.variant,
            domain,
            &self.layout,
            masks,
            &self.cfg.reward,
        )?;
        let mut stats = LearnStats {
            slot_transitions: t.slot.len(),
            ..Default::default()
        };
        for tr in t.slot {
            self.pi_i.store(tr)?;
        }
        let mut losses = Vec::new();
        for _ in 0..self.cfg.dqn.updates_per_dialogue {
            if let Some(l) = self.pi_i.update(rng)? {
                losses.push(l);
            }
        }
        if !losses.is_empty() {
            stats.pi_i_loss = Some(losses.iter().sum::<f64>() / losses.len() as f64);
        }
        let mut acer_losses = Vec::new();
        for (learner, ep) in [
            (self.merged.as_mut(), t.merged),
            (self.master.as_mut(), t.master),
            (self.general.as_mut(), t.general),
        ] {
            if let (Some(l), Some(ep)) = (learner, ep) {
                acer_losses.push(l.learn(ep, rng)?);
            }
        }
        if !acer_losses.is_empty() {
            stats.acer_loss = acer_losses.iter().sum::<f64>() / acer_losses.len() as f64;
        }
        self.dialogues += 1;
        Ok(stats)
    }

    /// π_i's mean squared TD error on a replay sample, for loss curves.
    pub fn pi_i_replay_loss(&self, rng: &mut DialogueRng) -> Result<Option<f64>> {
        self.pi_i.replay_loss(rng)
    }

    pub fn snapshot(&self) -> LearnedPolicy {
        LearnedPolicy {
            format_version: CHECKPOINT_FORMAT,
            domain: self.domain.clone(),
            variant: self.variant,
            config: self.cfg.clone(),
            dialogues: self.dialogues,
            pi_i: self.pi_i.online.clone(),
            merged: self.merged.as_ref().map(|l| l.net.clone()),
            master: self.master.as_ref().map(|l| l.net.clone()),
            general: self.general.as_ref().map(|l| l.net.clone()),
        }
    }

    /// Rebuilds a policy set from a snapshot; replay buffers start empty.
    pub fn from_snapshot(snap: LearnedPolicy, domain: &Domain) -> Result<Self> {
        if snap.domain != domain.ontology.name() {
            return Err(Error::Checkpoint(format!(
                "checkpoint was trained on {:?}, not {:?}",
                snap.domain,
                domain.ontology.name()
            )));
        }
        snap.variant.validate()?;
        let layout = FeatureLayout::new(domain, snap.config.max_turns);
        let check = |what: &str, got: usize, expected: usize| {
            if got == expected {
                Ok(())
            } else {
                Err(Error::Checkpoint(format!(
                    "{what} expects {got} inputs but the domain yields {expected}"
                )))
            }
        };
        check("pi_i", snap.pi_i.inputs(), layout.slot_dim())?;
        if snap.pi_i.outputs() != snap.variant.slot_actions() {
            return Err(Error::Checkpoint(
                "pi_i output width does not match the variant".into(),
            ));
        }
        let want = match snap.variant.architecture {
            Architecture::Merged => [true, false, false],
            Architecture::Feudal => [false, true, true],
        };
        let have = [
            snap.merged.is_some(),
            snap.master.is_some(),
            snap.general.is_some(),
        ];
        if want != have {
            return Err(Error::Checkpoint(
                "networks do not match the architecture".into(),
            ));
        }
        for net in [&snap.merged, &snap.master, &snap.general]
            .into_iter()
            .flatten()
        {
            check("master-level policy", net.inputs(), layout.master_dim())?;
        }
        let acer = |net| AcerLearner::from_network(net, snap.config.acer.clone());
        Ok(Self {
            variant: snap.variant,
            layout,
            domain: snap.domain,
            pi_i: DqnLearner::from_network(snap.pi_i, snap.config.dqn.clone()),
            merged: snap.merged.map(acer),
            master: snap.master.map(acer),
            general: snap.general.map(acer),
            dialogues: snap.dialogues,
            cfg: snap.config,
        })
    }

    fn choose_softmax(
        learner: &mut AcerLearner,
        x: &[f64],
        mut mask: Vec<bool>,
        fallback: usize,
        mode: SelectionMode,
        rng: &mut DialogueRng,
    ) -> SoftmaxChoice {
        if !mask.iter().any(|&a| a) {
            log::warn!("every action masked; falling back to action {fallback}");
            mask[fallback] = true;
        }
        let logits = match mode {
            SelectionMode::Train => learner.logits_explore(x, rng),
            SelectionMode::Eval => learner.logits_eval(x),
        }
        .expect("feature width matches the network");
        let behaviour = masked_softmax(&logits, &mask);
        let action = match mode {
            SelectionMode::Train => sample_index(&behaviour, rng),
            SelectionMode::Eval => masked_argmax(&logits, &mask).expect("some action is allowed"),
        };
        SoftmaxChoice {
            action,
            behaviour,
            mask,
        }
    }

    /// π_i's pick: global argmax over allowed (slot, kind) Q-values.
    fn choose_info(
        &mut self,
        features: &BeliefFeatures,
        mask: &ActionMask,
        mode: SelectionMode,
        rng: &mut DialogueRng,
    ) -> SystemAction {
        let n = self.layout.num_slots;
        let rows = ArrayView2::from_shape((n, features.slot_dim), &features.slots)
            .expect("slot rows are consistent");
        let q = match mode {
            SelectionMode::Train => self.pi_i.q_explore(rows, rng),
            SelectionMode::Eval => self.pi_i.q_eval(rows),
        }
        .expect("feature width matches the network");
        let allowed: Vec<bool> = if mask.any_info() {
            mask.info.clone()
        } else {
            log::warn!("information policy consulted with every action masked");
            vec![true; 3 * n]
        };
        let flat: Vec<f64> = (0..n)
            .flat_map(|s| (0..3).map(move |k| (s, k)))
            .map(|(s, k)| q[[s, k]])
            .collect();
        let explore = mode == SelectionMode::Train
            && !self.variant.noisy
            && rng.random::<f64>() < self.epsilon();
        let idx = if explore {
            let options: Vec<usize> = (0..flat.len()).filter(|&i| allowed[i]).collect();
            options[rng.random_range(0..options.len())]
        } else {
            masked_argmax(&flat, &allowed).expect("some info action is allowed")
        };
        SystemAction::Info {
            kind: InfoKind::ALL[idx % 3],
            slot: idx / 3,
        }
    }
}

impl DialoguePolicy for PolicySet {
    fn decide(
        &mut self,
        belief: &BeliefState,
        domain: &Domain,
        masks: bool,
        mode: SelectionMode,
        rng: &mut DialogueRng,
    ) -> Decision {
        let features = belief_features(&self.layout, belief, domain);
        let mask = apply_masks(belief, masks);
        let reqmore = GeneralAction::Reqmore.index();
        let mut trace = PolicyTrace::default();
        let action = match self.variant.architecture {
            Architecture::Merged => {
                let mut m = mask.general.to_vec();
                m.push(mask.any_info());
                let learner = self.merged.as_mut().expect("merged architecture");
                let choice = Self::choose_softmax(learner, &features.master, m, reqmore, mode, rng);
                let a = choice.action;
                trace.merged = Some(choice);
                if a == MERGED_INFO {
                    self.choose_info(&features, &mask, mode, rng)
                } else {
                    SystemAction::General(GeneralAction::ALL[a])
                }
            }
            Architecture::Feudal => {
                let m = vec![mask.any_info(), true];
                let learner = self.master.as_mut().expect("feudal architecture");
                let choice =
                    Self::choose_softmax(learner, &features.master, m, MASTER_GENERAL, mode, rng);
                let a = choice.action;
                trace.master = Some(choice);
                if a == MASTER_INFO {
                    self.choose_info(&features, &mask, mode, rng)
                } else {
                    let mut g = mask.general.to_vec();
                    g.push(false);
                    let learner = self.general.as_mut().expect("feudal architecture");
                    let choice =
                        Self::choose_softmax(learner, &features.master, g, reqmore, mode, rng);
                    let a = choice.action;
                    trace.general = Some(choice);
                    SystemAction::General(GeneralAction::ALL[a])
                }
            }
        };
        trace.info_acted = action.is_info();
        Decision { action, trace }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::initial_belief;
    use crate::dialogue::{run_dialogue, DialogueConfig};
    use crate::rng::from_seed;
    use crate::usersim::EnvProfile;

    fn small_cfg() -> PolicyConfig {
        let mut cfg = PolicyConfig::default();
        cfg.dqn.hidden = vec![16];
        cfg.acer.hidden = vec![16];
        cfg
    }

    #[test]
    fn initial_masked_decisions_are_requests_or_reqmore() {
        let d = Domain::cambridge_restaurants();
        let b = initial_belief(&d.ontology);
        for v in [Variant::FEUDALGAIN, Variant::FEUDAL, Variant::FEUDAL_NN] {
            let mut p = PolicySet::new(v, small_cfg(), &d, &mut from_seed(1)).unwrap();
            let mut rng = from_seed(2);
            for _ in 0..200 {
                let dec = p.decide(&b, &d, true, SelectionMode::Train, &mut rng);
                match dec.action {
                    SystemAction::Info { kind, .. } => assert_eq!(kind, InfoKind::Request),
                    a => assert_eq!(a, SystemAction::General(GeneralAction::Reqmore)),
                }
            }
        }
    }

    #[test]
    fn eval_selection_is_deterministic() {
        let d = Domain::cambridge_restaurants();
        let mut b = initial_belief(&d.ontology);
        b.slots[1].probs = vec![0.1, 0.6, 0.1, 0.1, 0.0, 0.05, 0.05];
        let mut p =
            PolicySet::new(Variant::FEUDALGAIN, small_cfg(), &d, &mut from_seed(1)).unwrap();
        let a = p.decide(&b, &d, true, SelectionMode::Eval, &mut from_seed(5));
        let c = p.decide(&b, &d, true, SelectionMode::Eval, &mut from_seed(99));
        assert_eq!(a, c);
    }

    #[test]
    fn learning_fills_buffers_without_pass_in_feudalgain() {
        let d = Domain::cambridge_restaurants();
        let env = EnvProfile::new(3).unwrap();
        let mut p =
            PolicySet::new(Variant::FEUDALGAIN, small_cfg(), &d, &mut from_seed(1)).unwrap();
        let mut rng = from_seed(3);
        for _ in 0..20 {
            let ep = run_dialogue(
                &mut p,
                &env,
                &d,
                &mut rng,
                &DialogueConfig::default(),
                SelectionMode::Train,
            )
            .unwrap();
            assert!(ep.turns.iter().all(|t| t.action != SystemAction::Pass));
            p.learn(&ep, &d, true, &mut rng).unwrap();
        }
        assert!(p.pi_i.replay().iter().all(|t| t.action < 3));
        assert_eq!(p.dialogues_trained(), 20);
    }

    #[test]
    fn snapshot_round_trip_preserves_decisions() {
        let d = Domain::cambridge_restaurants();
        let p = PolicySet::new(Variant::FEUDAL_NN, small_cfg(), &d, &mut from_seed(1)).unwrap();
        let json = serde_json::to_string(&p.snapshot()).unwrap();
        let mut q = PolicySet::from_snapshot(serde_json::from_str(&json).unwrap(), &d).unwrap();
        let mut p = p;
        let b = initial_belief(&d.ontology);
        let mut r1 = from_seed(0);
        let mut r2 = from_seed(0);
        assert_eq!(
            p.decide(&b, &d, false, SelectionMode::Eval, &mut r1),
            q.decide(&b, &d, false, SelectionMode::Eval, &mut r2)
        );
        assert!(PolicySet::from_snapshot(p.snapshot(), &Domain::sf_restaurants()).is_err());
    }

    #[test]
    fn epsilon_decays_linearly() {
        let d = Domain::cambridge_restaurants();
        let mut p = PolicySet::new(Variant::FEUDAL, small_cfg(), &d, &mut from_seed(1)).unwrap();
        assert!((p.epsilon() - 0.3).abs() < 1e-12);
        p.dialogues = 2000;
        assert!((p.epsilon() - 0.175).abs() < 1e-12);
        p.dialogues = 10_000;
        assert!((p.epsilon() - 0.05).abs() < 1e-12);
    }
}
