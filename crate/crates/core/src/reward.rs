//! Extrinsic and intrinsic rewards.
//!
//! The extrinsic reward is the environment signal: `-1` for every turn that
//! does not end the dialogue, and `0` or `20` on the final turn for failure or
//! success. The intrinsic reward measures how much a slot's value
//! distribution moved after an information-seeking action, and is
//! thresholded to `±1` before it is used to train the slot policy.

use serde::{Deserialize, Serialize};

use crate::belief::BeliefState;
use crate::domain::SystemAction;
use crate::error::{Error, Result};

const SIMPLEX_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    #[default]
    JensenShannon,
    KullbackLeibler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardConfig {
    pub success_reward: f64,
    pub turn_penalty: f64,
    /// Threshold on the information gain; gains `>= delta` earn `+1`.
    pub delta: f64,
    pub divergence: Divergence,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            success_reward: 20.0,
            turn_penalty: -1.0,
            delta: 0.2,
            divergence: Divergence::JensenShannon,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Config(format!(
                "delta {} outside [0, 1]",
                self.delta
            )));
        }
        Ok(())
    }

    pub fn extrinsic(&self, turn_ended: bool, success: bool) -> f64 {
        extrinsic_reward(self, turn_ended, success)
    }
}

/// Per-turn environment reward.
pub fn extrinsic_reward(cfg: &RewardConfig, turn_ended: bool, success: bool) -> f64 {
    match (turn_ended, success) {
        (false, _) => cfg.turn_penalty,
        (true, true) => cfg.success_reward,
        (true, false) => 0.0,
    }
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::Shape {
            expected: p.len(),
            got: q.len(),
        });
    }
    for (name, d) in [("p", p), ("q", q)] {
        if d.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{name} has negative or non-finite entries"
            )));
        }
        let s: f64 = d.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!("{name} sums to {s}, not 1")));
        }
    }
    Ok(())
}

/// `sum_v p(v) log2(p(v) / q(v))`, skipping `p(v) = 0` terms. Infinite when
/// `q` misses part of `p`'s support.
fn kl_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pv, _)| pv > 0.0)
        .map(|(&pv, &qv)| {
            if qv > 0.0 {
                pv * (pv / qv).log2()
            } else {
                f64::INFINITY
            }
        })
        .sum()
}

/// Jensen-Shannon divergence in bits; lies in `[0, 1]`.
pub fn js_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * (kl_bits(p, &m) + kl_bits(q, &m));
    Ok(js.clamp(0.0, 1.0))
}

/// Kullback-Leibler divergence `KL[p || q]` in bits.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    check_pair(p, q)?;
    Ok(kl_bits(p, q).max(0.0))
}

pub fn divergence(kind: Divergence, p: &[f64], q: &[f64]) -> Result<f64> {
    match kind {
        Divergence::JensenShannon => js_divergence(p, q),
        Divergence::KullbackLeibler => kl_divergence(p, q),
    }
}

/// Divergence between the value distributions of the slot targeted by an
/// information-seeking `action`, before and after the turn.
pub fn information_gain(
    cfg: &RewardConfig,
    before: &BeliefState,
    action: SystemAction,
    after: &BeliefState,
) -> Result<f64> {
    let slot = action
        .slot()
        .ok_or_else(|| Error::NotInformationSeeking(action.to_string()))?;
    let p = &before
        .slots
        .get(slot)
        .ok_or_else(|| Error::UnknownSlot(format!("#{slot}")))?
        .probs;
    let q = &after
        .slots
        .get(slot)
        .ok_or_else(|| Error::UnknownSlot(format!("#{slot}")))?
        .probs;
    divergence(cfg.divergence, p, q)
}

/// `+1` if the gain reaches `delta`, `-1` otherwise.
pub fn thresholded_gain(gain: f64, delta: f64) -> f64 {
    if gain >= delta {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::initial_belief;
    use crate::domain::{Domain, GeneralAction, InfoKind};

    #[test]
    fn extrinsic_values() {
        let cfg = RewardConfig::default();
        assert_eq!(extrinsic_reward(&cfg, false, false), -1.0);
        assert_eq!(extrinsic_reward(&cfg, false, true), -1.0);
        assert_eq!(extrinsic_reward(&cfg, true, false), 0.0);
        assert_eq!(extrinsic_reward(&cfg, true, true), 20.0);
    }

    #[test]
    fn js_on_disjoint_supports_is_one() {
        let js = js_divergence(&[0.0, 0.0, 0.0, 0.0, 1.0], &[0.5, 0.3, 0.2, 0.0, 0.0]).unwrap();
        assert!((js - 1.0).abs() < 1e-12);
    }

    #[test]
    fn js_second_turn() {
        let js = js_divergence(&[0.5, 0.3, 0.2, 0.0, 0.0], &[0.95, 0.05, 0.0, 0.0, 0.0]).unwrap();
        assert!((js - 0.22).abs() < 0.005, "{js}");
    }

    #[test]
    fn js_identity() {
        let p = [0.1, 0.2, 0.7];
        assert_eq!(js_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn js_input_errors() {
        assert!(matches!(
            js_divergence(&[1.0], &[0.5, 0.5]),
            Err(Error::Shape { .. })
        ));
        assert!(js_divergence(&[0.5, 0.4], &[0.5, 0.5]).is_err());
        assert!(js_divergence(&[1.5, -0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn kl_is_asymmetric_and_unbounded() {
        let p = [0.5, 0.5];
        let q = [1.0, 0.0];
        assert_eq!(kl_divergence(&p, &q).unwrap(), f64::INFINITY);
        assert!((kl_divergence(&q, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thresholds() {
        assert_eq!(thresholded_gain(0.22, 0.2), 1.0);
        assert_eq!(thresholded_gain(0.2, 0.2), 1.0);
        assert_eq!(thresholded_gain(0.19, 0.2), -1.0);
        assert_eq!(thresholded_gain(0.0, 0.2), -1.0);
        assert_eq!(thresholded_gain(1.0, 0.2), 1.0);
    }

    #[test]
    fn gain_needs_a_slot() {
        let o = Domain::cambridge_restaurants().ontology;
        let b = initial_belief(&o);
        let cfg = RewardConfig::default();
        let req = SystemAction::Info {
            kind: InfoKind::Request,
            slot: 0,
        };
        assert_eq!(information_gain(&cfg, &b, req, &b).unwrap(), 0.0);
        let mut b2 = b.clone();
        b2.slots[0].probs = vec![0.5, 0.3, 0.2, 0.0, 0.0];
        assert!((information_gain(&cfg, &b, req, &b2).unwrap() - 1.0).abs() < 1e-12);
        let bye = SystemAction::General(GeneralAction::Bye);
        assert!(matches!(
            information_gain(&cfg, &b, bye, &b2),
            Err(Error::NotInformationSeeking(_))
        ));
    }
}
