//! Dense one-hidden-layer networks: initialization, forward pass, exact
//! backpropagation, and SGD/Adam full-batch training.
//!
//! Summation order is fixed (rows ascending, then heads, then units), so a
//! given seed and config reproduce the same weights bit for bit.

mod network;
mod train;

pub use network::{
    backward, backward_batch, head_losses, init_network, loss, Activations, ArchConfig, Batch,
    GradientSet, HiddenActivation, Network, OutputActivation, PROB_EPS,
};
pub use train::{
    train, InitKind, LossKind, OptimizerKind, Step, TrainConfig, TrainOutcome, Trainer, ADAM_BETA1,
    ADAM_BETA2, ADAM_EPS,
};

/// Fraction of rows where head `head` predicts `labels` correctly.
pub fn accuracy(predictions: &[Vec<u8>], labels: &[u8], head: usize) -> f64 {
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, &l)| p[head] == l)
        .count();
    hits as f64 / labels.len() as f64
}

#[cfg(test)]
mod tests;
