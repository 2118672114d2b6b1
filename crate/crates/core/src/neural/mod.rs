//! Minimal feed-forward networks in 64-bit floating point.
//!
//! Layers are dense or noisy (factorised Gaussian noise on every weight,
//! `w = mu + sigma * eps`). A network ends in one of three heads: plain
//! Q-values, a dueling head combining `Q = V + A - mean(A)`, or a policy head
//! that emits action logits followed by Q-values. Gradients are computed by
//! reverse-mode accumulation through the recorded forward pass.

mod adam;
mod layer;
mod network;

pub use adam::Adam;
pub use layer::{Activation, DenseLayer, Layer, NoisyLayer};
pub use network::{dueling_combine, Gradients, Head, Network, NetworkSpec, Noise};
