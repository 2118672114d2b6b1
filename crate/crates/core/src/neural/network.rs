use ndarray::{s, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::layer::{Activation, DenseLayer, Layer, LayerCache, NoiseUse, NoisyLayer};
use crate::error::{Error, Result};
use crate::rng::DialogueRng;

/// Output head of a network with `n` actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// `n` Q-values.
    QValues,
    /// One state value and `n` advantages, combined into `n` Q-values.
    Dueling,
    /// `n` policy logits followed by `n` Q-values.
    PolicyAndQ,
}

impl Head {
    fn raw_outputs(self, n: usize) -> usize {
        match self {
            Head::QValues => n,
            Head::Dueling => n + 1,
            Head::PolicyAndQ => 2 * n,
        }
    }

    fn outputs(self, n: usize) -> usize {
        match self {
            Head::PolicyAndQ => 2 * n,
            _ => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub inputs: usize,
    pub hidden: Vec<usize>,
    pub actions: usize,
    pub head: Head,
    pub noisy: bool,
    pub activation: Activation,
    /// Initial noise scale numerator; each layer starts at `sigma0 / sqrt(fan_in)`.
    pub sigma0: f64,
}

impl NetworkSpec {
    pub fn new(inputs: usize, hidden: &[usize], actions: usize, head: Head, noisy: bool) -> Self {
        Self {
            inputs,
            hidden: hidden.to_vec(),
            actions,
            head,
            noisy,
            activation: Activation::Relu,
            sigma0: 0.5,
        }
    }
}

/// How noisy layers behave during a forward pass.
pub enum Noise<'a> {
    /// Draw fresh noise from the given rng.
    Sample(&'a mut DialogueRng),
    /// Use the noise drawn by the previous sampling pass.
    Frozen,
    /// Ignore noise, using the mean weights.
    Mean,
}

/// Parameter gradients aligned with [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients(pub Vec<Vec<f64>>);

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        Gradients(net.params().iter().map(|p| vec![0.0; p.len()]).collect())
    }

    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|g| g.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, k: f64) {
        self.0.iter_mut().flatten().for_each(|x| *x *= k);
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    /// Rescales so the global norm is at most `max_norm`. Returns the norm
    /// before clipping.
    pub fn clip_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
        norm
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }
}

/// `Q(a) = V + A(a) - mean(A)`.
pub fn dueling_combine(value: f64, advantages: &[f64]) -> Vec<f64> {
    let mean = advantages.iter().sum::<f64>() / advantages.len() as f64;
    advantages.iter().map(|a| value + a - mean).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Network {
    spec: NetworkSpec,
    layers: Vec<Layer>,
    #[serde(skip)]
    caches: Vec<LayerCache>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.layers == other.layers
    }
}

impl Network {
    pub fn new(spec: NetworkSpec, rng: &mut DialogueRng) -> Self {
        let mut sizes = vec![spec.inputs];
        sizes.extend(&spec.hidden);
        sizes.push(spec.head.raw_outputs(spec.actions));
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let act = if i == last {
                    Activation::Identity
                } else {
                    spec.activation
                };
                if spec.noisy {
                    Layer::Noisy(NoisyLayer::new(w[0], w[1], act, spec.sigma0, rng))
                } else {
                    Layer::Dense(DenseLayer::new(w[0], w[1], act, rng))
                }
            })
            .collect();
        Self {
            spec,
            layers,
            caches: Vec::new(),
        }
    }

    /// Builds a network from explicit layers; shapes must chain.
    pub fn from_layers(spec: NetworkSpec, layers: Vec<Layer>) -> Result<Self> {
        let mut width = spec.inputs;
        for l in &layers {
            if l.inputs() != width {
                return Err(Error::Shape {
                    expected: width,
                    got: l.inputs(),
                });
            }
            width = l.outputs();
        }
        let raw = spec.head.raw_outputs(spec.actions);
        if width != raw {
            return Err(Error::Shape {
                expected: raw,
                got: width,
            });
        }
        Ok(Self {
            spec,
            layers,
            caches: Vec::new(),
        })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn inputs(&self) -> usize {
        self.spec.inputs
    }

    pub fn outputs(&self) -> usize {
        self.spec.head.outputs(self.spec.actions)
    }

    pub fn num_params(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        if x.ncols() != self.spec.inputs {
            return Err(Error::Shape {
                expected: self.spec.inputs,
                got: x.ncols(),
            });
        }
        Ok(())
    }

    fn apply_head(&self, raw: Array2<f64>) -> Array2<f64> {
        match self.spec.head {
            Head::Dueling => {
                let v = raw.column(0).to_owned();
                let adv = raw.slice(s![.., 1..]);
                let mean = adv.mean_axis(Axis(1)).unwrap();
                let mut q = adv.to_owned();
                for (mut row, (v, m)) in q.outer_iter_mut().zip(v.iter().zip(mean.iter())) {
                    row.mapv_inplace(|a| a + v - m);
                }
                q
            }
            _ => raw,
        }
    }

    /// Forward pass over a batch (`rows = samples`), remembering what
    /// [`Network::backward`] needs.
    pub fn forward(&mut self, x: ArrayView2<f64>, noise: Noise<'_>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let (mode, mut rng) = match noise {
            Noise::Sample(r) => (NoiseUse::Fresh, Some(r)),
            Noise::Frozen => (NoiseUse::Frozen, None),
            Noise::Mean => (NoiseUse::Mean, None),
        };
        self.caches.clear();
        let mut h = x.to_owned();
        for layer in &mut self.layers {
            let (out, cache) = layer.forward(h, mode, rng.as_deref_mut());
            self.caches.push(cache);
            h = out;
        }
        Ok(self.apply_head(h))
    }

    /// Forward pass with mean weights that leaves no trace.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        let mut h = x.to_owned();
        for layer in &self.layers {
            h = layer.forward_mean(h.view());
        }
        Ok(self.apply_head(h))
    }

    /// Single-sample convenience wrapper around [`Network::predict`].
    pub fn predict_one(&self, x: &[f64]) -> Result<Vec<f64>> {
        let view = ArrayView2::from_shape((1, x.len()), x).map_err(|_| Error::Shape {
            expected: self.spec.inputs,
            got: x.len(),
        })?;
        Ok(self.predict(view)?.row(0).to_vec())
    }

    /// Gradients of `sum(grad_out * output)` w.r.t. every parameter, using
    /// the most recent forward pass.
    pub fn backward(&mut self, grad_out: &Array2<f64>) -> Result<Gradients> {
        if self.caches.len() != self.layers.len() {
            return Err(Error::NoForwardPass);
        }
        let batch = self.caches[0].batch();
        if grad_out.nrows() != batch || grad_out.ncols() != self.outputs() {
            return Err(Error::Shape {
                expected: batch * self.outputs(),
                got: grad_out.len(),
            });
        }
        let mut grad = match self.spec.head {
            Head::Dueling => {
                let n = self.spec.actions as f64;
                let mut raw = Array2::zeros((batch, self.spec.actions + 1));
                for (mut r, g) in raw.outer_iter_mut().zip(grad_out.outer_iter()) {
                    let total = g.sum();
                    r[0] = total;
                    for (k, &gk) in g.iter().enumerate() {
                        r[k + 1] = gk - total / n;
                    }
                }
                raw
            }
            _ => grad_out.clone(),
        };
        let mut per_layer = Vec::with_capacity(self.layers.len());
        for (layer, cache) in self.layers.iter().zip(&self.caches).rev() {
            let (d_in, grads) = layer.backward(grad, cache);
            per_layer.push(grads);
            grad = d_in;
        }
        per_layer.reverse();
        self.caches.clear();
        Ok(Gradients(per_layer.into_iter().flatten().collect()))
    }

    pub fn params(&self) -> Vec<&[f64]> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.params_mut())
            .collect()
    }

    /// Restores parameter constraints after an optimiser step.
    pub fn project(&mut self) {
        self.layers.iter_mut().for_each(Layer::project);
    }

    /// Copies the parameters of `other`, which must share this architecture.
    pub fn copy_from(&mut self, other: &Network) {
        debug_assert_eq!(self.spec, other.spec);
        self.layers = other.layers.clone();
    }
}
