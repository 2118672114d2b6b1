//! Actor-critic with experience replay for the master-level policies.
//!
//! The critic regresses `Q(x, a)` onto Retrace targets; the actor follows
//! truncated importance-weighted policy gradients with a bias-correction
//! term and an entropy bonus. There is no trust-region step.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::dqn::stack_rows;
use super::replay::ReplayBuffer;
use crate::error::{Error, Result};
use crate::neural::{Adam, Head, Network, NetworkSpec, Noise};
use crate::rng::DialogueRng;

/// Behaviour probabilities are clamped to this before division.
pub const MIN_BEHAVIOUR_PROB: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcerStep {
    pub features: Vec<f64>,
    pub action: usize,
    /// Behaviour distribution over all actions when the step was taken.
    pub behaviour: Vec<f64>,
    pub mask: Vec<bool>,
    pub reward: f64,
    /// The action was imposed rather than chosen (a pass while the other
    /// sub-policy acted). Such steps train the critic only.
    pub forced: bool,
}

/// One dialogue as seen by an actor-critic policy; the last step is terminal.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AcerEpisode {
    pub steps: Vec<AcerStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcerConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    /// Importance weight truncation `c`.
    pub truncation: f64,
    pub entropy: f64,
    pub replay_capacity: usize,
    pub replays_per_dialogue: usize,
    pub grad_clip: f64,
}

impl Default for AcerConfig {
    fn default() -> Self {
        Self {
            hidden: vec![250, 130],
            learning_rate: 5e-4,
            gamma: 0.99,
            truncation: 10.0,
            entropy: 0.01,
            replay_capacity: 2000,
            replays_per_dialogue: 4,
            grad_clip: 10.0,
        }
    }
}

/// Softmax over the allowed entries; disallowed entries get probability 0.
/// With nothing allowed the result is uniform over all entries.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let allowed = |i: usize| mask.get(i).copied().unwrap_or(true);
    let max = logits
        .iter()
        .enumerate()
        .filter(|(i, _)| allowed(*i))
        .map(|(_, &z)| z)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![1.0 / logits.len() as f64; logits.len()];
    }
    let mut p: Vec<f64> = logits
        .iter()
        .enumerate()
        .map(|(i, &z)| if allowed(i) { (z - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// `min(c, rho)`.
pub fn truncated_weight(rho: f64, c: f64) -> f64 {
    rho.min(c)
}

/// Retrace targets for one episode ending in a terminal step:
/// `Q_ret(T-1) = r(T-1)` and
/// `Q_ret(t) = r(t) + gamma * (min(1, rho(t+1)) * (Q_ret(t+1) - Q(t+1)) + V(t+1))`.
pub fn retrace_targets(
    rewards: &[f64],
    q_taken: &[f64],
    values: &[f64],
    rho: &[f64],
    gamma: f64,
) -> Vec<f64> {
    let n = rewards.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    out[n - 1] = rewards[n - 1];
    for t in (0..n - 1).rev() {
        let c = rho[t + 1].min(1.0);
        out[t] = rewards[t] + gamma * (c * (out[t + 1] - q_taken[t + 1]) + values[t + 1]);
    }
    out
}

/// Gradient of the actor-critic loss w.r.t. the network outputs (`T x 2n`:
/// logits then Q-values) and the mean critic loss.
pub(crate) fn output_gradient(
    out: &Array2<f64>,
    steps: &[AcerStep],
    n: usize,
    cfg: &AcerConfig,
) -> (Array2<f64>, f64) {
    let t_len = steps.len();
    let mut pis = Vec::with_capacity(t_len);
    let mut values = Vec::with_capacity(t_len);
    let mut q_taken = Vec::with_capacity(t_len);
    let mut rhos = Vec::with_capacity(t_len);
    for (t, s) in steps.iter().enumerate() {
        let row = out.row(t);
        let row = row.as_slice().unwrap();
        let (logits, q) = row.split_at(n);
        let pi = if s.forced {
            let mut p = vec![0.0; n];
            p[s.action] = 1.0;
            p
        } else {
            masked_softmax(logits, &s.mask)
        };
        values.push(pi.iter().zip(q).map(|(p, q)| p * q).sum::<f64>());
        q_taken.push(q[s.action]);
        rhos.push(if s.forced {
            1.0
        } else {
            pi[s.action] / s.behaviour[s.action].max(MIN_BEHAVIOUR_PROB)
        });
        pis.push(pi);
    }
    let rewards: Vec<f64> = steps.iter().map(|s| s.reward).collect();
    let q_ret = retrace_targets(&rewards, &q_taken, &values, &rhos, cfg.gamma);

    let scale = 1.0 / t_len as f64;
    let c = cfg.truncation;
    let beta = cfg.entropy;
    let mut grad = Array2::zeros(out.raw_dim());
    let mut critic_loss = 0.0;
    for (t, s) in steps.iter().enumerate() {
        let err = q_taken[t] - q_ret[t];
        critic_loss += 0.5 * err * err;
        grad[[t, n + s.action]] = err * scale;
        if s.forced {
            continue;
        }
        let pi = &pis[t];
        let row = out.row(t);
        let q = &row.as_slice().unwrap()[n..];
        let v = values[t];
        let w = truncated_weight(rhos[t], c) * (q_ret[t] - v);
        let mut k = vec![0.0; n];
        for a in 0..n {
            if pi[a] > 0.0 {
                let rho_a = pi[a] / s.behaviour[a].max(MIN_BEHAVIOUR_PROB);
                k[a] = (1.0 - c / rho_a).max(0.0) * pi[a] * (q[a] - v);
            }
        }
        let k_sum: f64 = k.iter().sum();
        let entropy: f64 = pi.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
        for j in 0..n {
            if pi[j] == 0.0 {
                continue;
            }
            let taken = if j == s.action { w } else { 0.0 };
            let d_j = taken + k[j] - pi[j] * (w + k_sum) - beta * pi[j] * (pi[j].ln() + entropy);
            grad[[t, j]] = -d_j * scale;
        }
    }
    (grad, critic_loss * scale)
}

#[derive(Debug, Clone)]
pub struct AcerLearner {
    pub net: Network,
    adam: Adam,
    replay: ReplayBuffer<AcerEpisode>,
    cfg: AcerConfig,
}

impl AcerLearner {
    pub fn new(
        inputs: usize,
        actions: usize,
        noisy: bool,
        cfg: AcerConfig,
        rng: &mut DialogueRng,
    ) -> Self {
        let spec = NetworkSpec::new(inputs, &cfg.hidden, actions, Head::PolicyAndQ, noisy);
        Self::from_network(Network::new(spec, rng), cfg)
    }

    pub fn from_network(net: Network, cfg: AcerConfig) -> Self {
        Self {
            adam: Adam::new(cfg.learning_rate),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            net,
            cfg,
        }
    }

    pub fn actions(&self) -> usize {
        self.net.spec().actions
    }

    pub fn replay(&self) -> &ReplayBuffer<AcerEpisode> {
        &self.replay
    }

    /// Policy logits with mean weights.
    pub fn logits_eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = self.net.predict_one(x)?;
        Ok(out[..self.actions()].to_vec())
    }

    /// Policy logits under a fresh noise sample (mean weights for plain networks).
    pub fn logits_explore(&mut self, x: &[f64], rng: &mut DialogueRng) -> Result<Vec<f64>> {
        if !self.net.spec().noisy {
            return self.logits_eval(x);
        }
        let view = ndarray::ArrayView2::from_shape((1, x.len()), x).map_err(|_| Error::Shape {
            expected: self.net.inputs(),
            got: x.len(),
        })?;
        let out = self.net.forward(view, Noise::Sample(rng))?;
        Ok(out.row(0).as_slice().unwrap()[..self.actions()].to_vec())
    }

    /// Stores the episode, then runs one on-policy and
    /// `replays_per_dialogue` replayed updates. Returns the mean critic loss.
    pub fn learn(&mut self, episode: AcerEpisode, rng: &mut DialogueRng) -> Result<f64> {
        if episode.steps.is_empty() {
            return Ok(0.0);
        }
        let mut loss = self.update(&episode, rng)?;
        self.replay.push(episode);
        for _ in 0..self.cfg.replays_per_dialogue {
            let ep = self
                .replay
                .choose(rng)
                .expect("replay is non-empty")
                .clone();
            loss += self.update(&ep, rng)?;
        }
        Ok(loss / (1 + self.cfg.replays_per_dialogue) as f64)
    }

    /// One gradient step on a whole episode. Returns the critic loss.
    pub fn update(&mut self, episode: &AcerEpisode, rng: &mut DialogueRng) -> Result<f64> {
        let steps = &episode.steps;
        let n = self.actions();
        let x = stack_rows(
            steps.iter().map(|s| s.features.as_slice()),
            self.net.inputs(),
        );
        let out = if self.net.spec().noisy {
            self.net.forward(x.view(), Noise::Sample(rng))?
        } else {
            self.net.forward(x.view(), Noise::Mean)?
        };

        let (grad, critic_loss) = output_gradient(&out, steps, n, &self.cfg);
        if !critic_loss.is_finite() {
            return Err(Error::NonFinite(format!("actor-critic loss {critic_loss}")));
        }
        let mut g = self.net.backward(&grad)?;
        g.clip_norm(self.cfg.grad_clip);
        self.adam.step_network(&mut self.net, &g)?;
        Ok(critic_loss)
    }
}
