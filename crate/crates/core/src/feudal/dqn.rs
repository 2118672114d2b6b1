//! Slot-shared dueling double-DQN for the information policy.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::replay::ReplayBuffer;
use crate::error::{Error, Result};
use crate::neural::{Adam, Head, Network, NetworkSpec, Noise};
use crate::rng::DialogueRng;

/// One slot-level experience tuple `(b, a, r, b')`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotTransition {
    pub slot: usize,
    pub features: Vec<f64>,
    /// Index into request, confirm, select (then pass in baseline mode).
    pub action: usize,
    pub reward: f64,
    pub next_features: Vec<f64>,
    /// Actions available in the next state, for the bootstrap argmax.
    pub next_mask: Vec<bool>,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DqnConfig {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub updates_per_dialogue: usize,
    pub target_sync: u64,
    pub replay_capacity: usize,
    pub grad_clip: f64,
    /// Samples used for the logged replay loss.
    pub loss_samples: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            hidden: vec![130, 50],
            learning_rate: 1e-3,
            gamma: 0.99,
            batch_size: 64,
            updates_per_dialogue: 2,
            target_sync: 200,
            replay_capacity: 10_000,
            grad_clip: 10.0,
            loss_samples: 512,
        }
    }
}

/// `y = r + gamma * Q_target(b', argmax_a Q_online(b', a))`, or `y = r` on
/// terminal transitions. Only actions with `next_mask[a]` compete in the argmax.
pub fn double_dqn_target(
    reward: f64,
    gamma: f64,
    terminal: bool,
    q_online_next: &[f64],
    q_target_next: &[f64],
    next_mask: &[bool],
) -> f64 {
    if terminal {
        return reward;
    }
    let best = q_online_next
        .iter()
        .enumerate()
        .filter(|(a, _)| next_mask.get(*a).copied().unwrap_or(true))
        .fold(None::<(usize, f64)>, |acc, (a, &q)| match acc {
            Some((_, bq)) if bq >= q => acc,
            _ => Some((a, q)),
        });
    match best {
        Some((a, _)) => reward + gamma * q_target_next[a],
        None => reward,
    }
}

#[derive(Debug, Clone)]
pub struct DqnLearner {
    pub online: Network,
    target: Network,
    adam: Adam,
    replay: ReplayBuffer<SlotTransition>,
    updates: u64,
    cfg: DqnConfig,
}

impl DqnLearner {
    pub fn new(
        inputs: usize,
        actions: usize,
        noisy: bool,
        cfg: DqnConfig,
        rng: &mut DialogueRng,
    ) -> Self {
        let spec = NetworkSpec::new(inputs, &cfg.hidden, actions, Head::Dueling, noisy);
        Self::from_network(Network::new(spec, rng), cfg)
    }

    pub fn from_network(online: Network, cfg: DqnConfig) -> Self {
        Self {
            target: online.clone(),
            adam: Adam::new(cfg.learning_rate),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            updates: 0,
            online,
            cfg,
        }
    }

    pub fn config(&self) -> &DqnConfig {
        &self.cfg
    }

    pub fn replay(&self) -> &ReplayBuffer<SlotTransition> {
        &self.replay
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn actions(&self) -> usize {
        self.online.outputs()
    }

    /// Q-values with mean weights.
    pub fn q_eval(&self, rows: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.online.predict(rows)
    }

    /// Q-values under a fresh noise sample (mean weights for plain networks).
    pub fn q_explore(
        &mut self,
        rows: ArrayView2<f64>,
        rng: &mut DialogueRng,
    ) -> Result<Array2<f64>> {
        if self.online.spec().noisy {
            self.online.forward(rows, Noise::Sample(rng))
        } else {
            self.online.predict(rows)
        }
    }

    pub fn store(&mut self, t: SlotTransition) -> Result<()> {
        if t.action >= self.actions() || t.features.len() != self.online.inputs() {
            return Err(Error::Shape {
                expected: self.online.inputs(),
                got: t.features.len(),
            });
        }
        self.replay.push(t);
        Ok(())
    }

    fn noise<'a>(noisy: bool, rng: &'a mut DialogueRng) -> Noise<'a> {
        if noisy {
            Noise::Sample(rng)
        } else {
            Noise::Mean
        }
    }

    /// One gradient step on a sampled batch. Returns the batch loss, or
    /// `None` while the replay holds fewer than `batch_size` tuples.
    pub fn update(&mut self, rng: &mut DialogueRng) -> Result<Option<f64>> {
        let b = self.cfg.batch_size;
        let Some(batch) = self.replay.sample(b, rng) else {
            return Ok(None);
        };
        let dim = self.online.inputs();
        let x = stack_rows(
            batch
                .iter()
                .map(|t| t.features.as_slice())
                .chain(batch.iter().map(|t| t.next_features.as_slice())),
            dim,
        );
        let next = stack_rows(batch.iter().map(|t| t.next_features.as_slice()), dim);
        let noisy = self.online.spec().noisy;
        let target_q = self.target.forward(next.view(), Self::noise(noisy, rng))?;
        let q = self.online.forward(x.view(), Self::noise(noisy, rng))?;
        let mut grad = Array2::zeros(q.raw_dim());
        let mut loss = 0.0;
        for (i, t) in batch.iter().enumerate() {
            let y = double_dqn_target(
                t.reward,
                self.cfg.gamma,
                t.terminal,
                q.row(b + i).as_slice().unwrap(),
                target_q.row(i).as_slice().unwrap(),
                &t.next_mask,
            );
            let err = q[[i, t.action]] - y;
            loss += err * err;
            grad[[i, t.action]] = 2.0 * err / b as f64;
        }
        let loss = loss / b as f64;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!("slot policy loss {loss}")));
        }
        let mut g = self.online.backward(&grad)?;
        g.clip_norm(self.cfg.grad_clip);
        self.adam.step_network(&mut self.online, &g)?;
        self.updates += 1;
        if self.updates.is_multiple_of(self.cfg.target_sync) {
            self.target.copy_from(&self.online);
        }
        Ok(Some(loss))
    }

    /// Mean squared TD error on `loss_samples` replayed tuples, mean weights.
    pub fn replay_loss(&self, rng: &mut DialogueRng) -> Result<Option<f64>> {
        let n = self.cfg.loss_samples.min(self.replay.len());
        if n == 0 {
            return Ok(None);
        }
        let batch = self.replay.sample(n, rng).expect("n <= len");
        let dim = self.online.inputs();
        let x = stack_rows(batch.iter().map(|t| t.features.as_slice()), dim);
        let next = stack_rows(batch.iter().map(|t| t.next_features.as_slice()), dim);
        let q = self.online.predict(x.view())?;
        let qn = self.online.predict(next.view())?;
        let qt = self.target.predict(next.view())?;
        let mut loss = 0.0;
        for (i, t) in batch.iter().enumerate() {
            let y = double_dqn_target(
                t.reward,
                self.cfg.gamma,
                t.terminal,
                qn.row(i).as_slice().unwrap(),
                qt.row(i).as_slice().unwrap(),
                &t.next_mask,
            );
            loss += (q[[i, t.action]] - y).powi(2);
        }
        Ok(Some(loss / n as f64))
    }
}

/// Stacks equally long rows into a matrix.
pub(crate) fn stack_rows<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> Array2<f64> {
    let mut data = Vec::new();
    for r in rows {
        debug_assert_eq!(r.len(), dim);
        data.extend_from_slice(r);
    }
    let n = data.len() / dim;
    Array2::from_shape_vec((n, dim), data).expect("rows have equal width")
}
