//! Gradient competition on the shared hidden layer, and loss oscillation.

use serde::{Deserialize, Serialize};

use super::protocol::{annotate, context_seed};
use crate::error::{Error, Result};
use crate::neuralcore::{
    backward, init_network, ArchConfig, GradientSet, Network, TrainConfig, Trainer,
};
use crate::tasklab::{enumerate_dataset, ContextPair, LabeledDataset};

/// Norm below which a head's contribution counts as absent.
pub const NORM_FLOOR: f64 = 1e-12;

/// Cosine between the Alice-head and Bob-head gradients on each hidden
/// unit's incoming weights and bias. `None` when either norm is below
/// [`NORM_FLOOR`].
pub fn unit_cosines(grads: &GradientSet) -> Vec<Option<f64>> {
    (0..grads.db1.len())
        .map(|h| {
            let a = grads.unit_contribution(0, h);
            let b = grads.unit_contribution(1, h);
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na < NORM_FLOOR || nb < NORM_FLOOR {
                return None;
            }
            let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            Some((dot / (na * nb)).clamp(-1.0, 1.0))
        })
        .collect()
}

pub fn gradient_conflict(net: &Network, dataset: &LabeledDataset) -> Result<Vec<Option<f64>>> {
    Ok(unit_cosines(&backward(net, dataset)?))
}

/// Share of all hidden units whose cosine is negative.
pub fn conflict_fraction(cosines: &[Option<f64>]) -> f64 {
    if cosines.is_empty() {
        return 0.0;
    }
    cosines
        .iter()
        .filter(|c| matches!(c, Some(v) if *v < 0.0))
        .count() as f64
        / cosines.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictRecord {
    /// Epoch whose update used these gradients (1-based).
    pub epoch: usize,
    pub cosines: Vec<Option<f64>>,
    pub conflict_fraction: f64,
    pub alice_loss: f64,
    pub bob_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictTrace {
    pub pair: ContextPair,
    pub records: Vec<ConflictRecord>,
}

impl ConflictTrace {
    /// Mean conflict fraction over epochs `start..=end`.
    pub fn mean_conflict(&self, start: usize, end: usize) -> Result<f64> {
        let window: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.epoch >= start && r.epoch <= end)
            .map(|r| r.conflict_fraction)
            .collect();
        if window.is_empty() {
            return Err(Error::Window {
                start,
                end,
                points: 0,
            });
        }
        Ok(window.iter().sum::<f64>() / window.len() as f64)
    }

    pub fn alice_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.alice_loss).collect()
    }

    pub fn bob_losses(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.bob_loss).collect()
    }
}

/// Trains the network for `pair` (same seed as the four-context run) and
/// records per-unit gradient cosines at every epoch.
pub fn conflict_trace(
    n: usize,
    master_seed: u64,
    cfg: &TrainConfig,
    pair: ContextPair,
) -> Result<ConflictTrace> {
    let seed = context_seed(master_seed, pair.slot());
    let net = init_network(ArchConfig::ncnet(n).with_encoding(cfg.input_encoding), seed)?;
    let mut trainer = Trainer::new(net, &enumerate_dataset(pair), &TrainConfig { seed, ..*cfg })?;
    let mut records = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let step = trainer.step().map_err(|e| annotate(&pair, e))?;
        let cosines = unit_cosines(&step.grads);
        records.push(ConflictRecord {
            epoch: step.epoch,
            conflict_fraction: conflict_fraction(&cosines),
            cosines,
            alice_loss: step.head_losses[0],
            bob_loss: step.head_losses[1],
        });
    }
    Ok(ConflictTrace { pair, records })
}

/// Mean absolute successive difference of `trace[warmup..]`, divided by
/// the mean loss over the same entries.
pub fn loss_oscillation(trace: &[f64], warmup: usize) -> Result<f64> {
    if trace.len() <= warmup + 1 {
        return Err(Error::TraceTooShort {
            len: trace.len(),
            warmup,
        });
    }
    let window = &trace[warmup..];
    let diffs =
        window.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (window.len() - 1) as f64;
    let mean = window.iter().sum::<f64>() / window.len() as f64;
    if mean == 0.0 {
        return Ok(0.0);
    }
    Ok(diffs / mean)
}
