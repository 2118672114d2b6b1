use serde::{Deserialize, Serialize};

use super::network::{Gradients, Network};
use crate::error::{Error, Result};

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one descent step to `params`. Rejects non-finite gradients
    /// without touching any state.
    pub fn step(&mut self, params: Vec<&mut [f64]>, grads: &Gradients) -> Result<()> {
        if params.len() != grads.0.len() {
            return Err(Error::Shape {
                expected: params.len(),
                got: grads.0.len(),
            });
        }
        for (i, (p, g)) in params.iter().zip(&grads.0).enumerate() {
            if p.len() != g.len() {
                return Err(Error::Shape {
                    expected: p.len(),
                    got: g.len(),
                });
            }
            if let Some(j) = g.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "gradient tensor {i} index {j} is {}",
                    g[j]
                )));
            }
        }
        if self.m.len() != params.len() {
            self.m = params.iter().map(|p| vec![0.0; p.len()]).collect();
            self.v = self.m.clone();
            self.t = 0;
        }
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for (((p, g), m), v) in params
            .into_iter()
            .zip(&grads.0)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for k in 0..p.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let m_hat = m[k] / c1;
                let v_hat = v[k] / c2;
                p[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }

    /// Steps a whole network and re-applies its parameter constraints.
    pub fn step_network(&mut self, net: &mut Network, grads: &Gradients) -> Result<()> {
        self.step(net.params_mut(), grads)?;
        net.project();
        Ok(())
    }
}
