use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::{StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::rng::DialogueRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: &mut Array2<f64>) {
        match self {
            Activation::Relu => z.mapv_inplace(|x| x.max(0.0)),
            Activation::Tanh => z.mapv_inplace(f64::tanh),
            Activation::Identity => {}
        }
    }

    /// Multiplies `grad` by the activation derivative, expressed through the
    /// activation's output.
    fn backprop(self, grad: &mut Array2<f64>, output: &Array2<f64>) {
        match self {
            Activation::Relu => Zip::from(grad).and(output).for_each(|g, &y| {
                if y <= 0.0 {
                    *g = 0.0
                }
            }),
            Activation::Tanh => Zip::from(grad)
                .and(output)
                .for_each(|g, &y| *g *= 1.0 - y * y),
            Activation::Identity => {}
        }
    }
}

fn uniform_matrix(rows: usize, cols: usize, bound: f64, rng: &mut DialogueRng) -> Array2<f64> {
    let dist = Uniform::new_inclusive(-bound, bound).unwrap();
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(dist))
}

fn uniform_vector(n: usize, bound: f64, rng: &mut DialogueRng) -> Array1<f64> {
    let dist = Uniform::new_inclusive(-bound, bound).unwrap();
    Array1::from_shape_simple_fn(n, || rng.sample(dist))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `out x in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut DialogueRng,
    ) -> Self {
        let bound = 1.0 / (inputs as f64).sqrt();
        Self {
            weight: uniform_matrix(outputs, inputs, bound, rng),
            bias: uniform_vector(outputs, bound, rng),
            activation,
        }
    }
}

/// Linear layer with factorised Gaussian parameter noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoisyLayer {
    pub mu_w: Array2<f64>,
    pub sigma_w: Array2<f64>,
    pub mu_b: Array1<f64>,
    pub sigma_b: Array1<f64>,
    pub activation: Activation,
    /// `f(eps)` for the input and output noise vectors, `f(x) = sgn(x) sqrt|x|`.
    #[serde(skip)]
    eps_in: Array1<f64>,
    #[serde(skip)]
    eps_out: Array1<f64>,
}

impl PartialEq for NoisyLayer {
    /// Compares parameters; the current noise draw is not part of a layer's identity.
    fn eq(&self, other: &Self) -> bool {
        self.mu_w == other.mu_w
            && self.sigma_w == other.sigma_w
            && self.mu_b == other.mu_b
            && self.sigma_b == other.sigma_b
            && self.activation == other.activation
    }
}

impl NoisyLayer {
    pub fn new(
        inputs: usize,
        outputs: usize,
        activation: Activation,
        sigma0: f64,
        rng: &mut DialogueRng,
    ) -> Self {
        let fan = (inputs as f64).sqrt();
        Self {
            mu_w: uniform_matrix(outputs, inputs, 1.0 / fan, rng),
            sigma_w: Array2::from_elem((outputs, inputs), sigma0 / fan),
            mu_b: uniform_vector(outputs, 1.0 / fan, rng),
            sigma_b: Array1::from_elem(outputs, sigma0 / fan),
            activation,
            eps_in: Array1::zeros(inputs),
            eps_out: Array1::zeros(outputs),
        }
    }

    /// Draws fresh noise vectors.
    pub fn resample(&mut self, rng: &mut DialogueRng) {
        let f = |x: f64| x.signum() * x.abs().sqrt();
        self.eps_in = Array1::from_shape_simple_fn(self.mu_w.ncols(), || {
            f(rng.sample::<f64, _>(StandardNormal))
        });
        self.eps_out = Array1::from_shape_simple_fn(self.mu_w.nrows(), || {
            f(rng.sample::<f64, _>(StandardNormal))
        });
    }

    /// Overrides the noise vectors (already passed through `f`).
    pub fn set_noise(&mut self, eps_in: Array1<f64>, eps_out: Array1<f64>) {
        assert_eq!(eps_in.len(), self.mu_w.ncols());
        assert_eq!(eps_out.len(), self.mu_w.nrows());
        self.eps_in = eps_in;
        self.eps_out = eps_out;
    }

    fn ensure_noise_shape(&mut self) {
        if self.eps_in.len() != self.mu_w.ncols() || self.eps_out.len() != self.mu_w.nrows() {
            self.eps_in = Array1::zeros(self.mu_w.ncols());
            self.eps_out = Array1::zeros(self.mu_w.nrows());
        }
    }

    fn eps_w(&self) -> Array2<f64> {
        let out = self.eps_out.view().insert_axis(Axis(1));
        let inp = self.eps_in.view().insert_axis(Axis(0));
        &out * &inp
    }

    fn effective(&self) -> (Array2<f64>, Array1<f64>) {
        let w = &self.mu_w + &(&self.sigma_w * &self.eps_w());
        let b = &self.mu_b + &(&self.sigma_b * &self.eps_out);
        (w, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Layer {
    Dense(DenseLayer),
    Noisy(NoisyLayer),
}

/// What a layer remembers from its last forward pass.
#[derive(Debug, Clone)]
pub(crate) struct LayerCache {
    input: Array2<f64>,
    output: Array2<f64>,
    /// Effective weights when noise was applied.
    noisy_weight: Option<Array2<f64>>,
}

/// How noisy layers treat their noise in one forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum NoiseUse {
    Fresh,
    Mean,
    Frozen,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        match self {
            Layer::Dense(l) => l.weight.ncols(),
            Layer::Noisy(l) => l.mu_w.ncols(),
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            Layer::Dense(l) => l.weight.nrows(),
            Layer::Noisy(l) => l.mu_w.nrows(),
        }
    }

    pub fn activation(&self) -> Activation {
        match self {
            Layer::Dense(l) => l.activation,
            Layer::Noisy(l) => l.activation,
        }
    }

    pub(crate) fn forward(
        &mut self,
        input: Array2<f64>,
        noise: NoiseUse,
        rng: Option<&mut DialogueRng>,
    ) -> (Array2<f64>, LayerCache) {
        let (mut z, noisy_weight) = match self {
            Layer::Dense(l) => (input.dot(&l.weight.t()) + &l.bias, None),
            Layer::Noisy(l) => match noise {
                NoiseUse::Mean => (input.dot(&l.mu_w.t()) + &l.mu_b, None),
                NoiseUse::Fresh | NoiseUse::Frozen => {
                    if noise == NoiseUse::Fresh {
                        l.resample(rng.expect("fresh noise needs an rng"));
                    } else {
                        l.ensure_noise_shape();
                    }
                    let (w, b) = l.effective();
                    (input.dot(&w.t()) + &b, Some(w))
                }
            },
        };
        self.activation().apply(&mut z);
        let cache = LayerCache {
            input,
            output: z.clone(),
            noisy_weight,
        };
        (z, cache)
    }

    /// Forward pass with mean weights and no bookkeeping.
    pub(crate) fn forward_mean(&self, input: ArrayView2<f64>) -> Array2<f64> {
        let mut z = match self {
            Layer::Dense(l) => input.dot(&l.weight.t()) + &l.bias,
            Layer::Noisy(l) => input.dot(&l.mu_w.t()) + &l.mu_b,
        };
        self.activation().apply(&mut z);
        z
    }

    /// Back-propagates `grad` (w.r.t. this layer's output). Returns the
    /// gradient w.r.t. the input and the parameter gradients in
    /// [`Layer::params`] order.
    pub(crate) fn backward(
        &self,
        mut grad: Array2<f64>,
        cache: &LayerCache,
    ) -> (Array2<f64>, Vec<Vec<f64>>) {
        self.activation().backprop(&mut grad, &cache.output);
        let d_w = grad.t().dot(&cache.input);
        let d_b = grad.sum_axis(Axis(0));
        match self {
            Layer::Dense(l) => {
                let d_in = grad.dot(&l.weight);
                (d_in, vec![into_vec(d_w), into_vec1(d_b)])
            }
            Layer::Noisy(l) => {
                let (d_in, d_sw, d_sb) = match &cache.noisy_weight {
                    Some(w) => (grad.dot(w), &d_w * &l.eps_w(), &d_b * &l.eps_out),
                    None => (
                        grad.dot(&l.mu_w),
                        Array2::zeros(l.sigma_w.raw_dim()),
                        Array1::zeros(l.sigma_b.raw_dim()),
                    ),
                };
                (
                    d_in,
                    vec![
                        into_vec(d_w),
                        into_vec(d_sw),
                        into_vec1(d_b),
                        into_vec1(d_sb),
                    ],
                )
            }
        }
    }

    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Dense(l) => vec![l.weight.as_slice().unwrap(), l.bias.as_slice().unwrap()],
            Layer::Noisy(l) => vec![
                l.mu_w.as_slice().unwrap(),
                l.sigma_w.as_slice().unwrap(),
                l.mu_b.as_slice().unwrap(),
                l.sigma_b.as_slice().unwrap(),
            ],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Dense(l) => vec![
                l.weight.as_slice_mut().unwrap(),
                l.bias.as_slice_mut().unwrap(),
            ],
            Layer::Noisy(l) => vec![
                l.mu_w.as_slice_mut().unwrap(),
                l.sigma_w.as_slice_mut().unwrap(),
                l.mu_b.as_slice_mut().unwrap(),
                l.sigma_b.as_slice_mut().unwrap(),
            ],
        }
    }

    /// Keeps noise scales non-negative.
    pub(crate) fn project(&mut self) {
        if let Layer::Noisy(l) = self {
            l.sigma_w.mapv_inplace(|s| s.max(0.0));
            l.sigma_b.mapv_inplace(|s| s.max(0.0));
        }
    }
}

fn into_vec(a: Array2<f64>) -> Vec<f64> {
    let a = a.as_standard_layout().into_owned();
    a.into_raw_vec_and_offset().0
}

fn into_vec1(a: Array1<f64>) -> Vec<f64> {
    a.to_vec()
}

impl LayerCache {
    pub(crate) fn batch(&self) -> usize {
        self.input.nrows()
    }
}
