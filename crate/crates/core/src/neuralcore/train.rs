use serde::{Deserialize, Serialize};

use super::network::{backward_batch, head_losses, Batch, GradientSet, Network};
use crate::error::{Error, Result};
use crate::tasklab::{InputEncoding, LabeledDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(Self::Sgd),
            "adam" => Ok(Self::Adam),
            other => Err(Error::InvalidConfig(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LossKind {
    #[default]
    Bce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InitKind {
    #[default]
    UniformXavier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default)]
    pub loss: LossKind,
    #[serde(default)]
    pub init: InitKind,
    /// Initialization seed. Harness code overwrites this per trial.
    #[serde(default)]
    pub seed: u64,
    /// Input encoding the harness builds networks with.
    #[serde(default)]
    pub input_encoding: InputEncoding,
}

impl Default for TrainConfig {
    /// Adam, lr 0.05, 2000 full-batch epochs, signed inputs.
    fn default() -> Self {
        Self {
            optimizer: OptimizerKind::Adam,
            learning_rate: 0.05,
            epochs: 2000,
            loss: LossKind::Bce,
            init: InitKind::UniformXavier,
            seed: 0,
            input_encoding: InputEncoding::Signed,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        // lr = 0 is accepted so frozen-network runs can be expressed.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        Ok(())
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone)]
enum OptimizerState {
    Sgd,
    Adam { m: Vec<f64>, v: Vec<f64>, t: i32 },
}

/// Result of one full-batch update.
#[derive(Debug, Clone)]
pub struct Step {
    /// 1-based epoch number just completed.
    pub epoch: usize,
    /// Gradients at the parameters before the update.
    pub grads: GradientSet,
    /// Per-head losses after the update.
    pub head_losses: Vec<f64>,
}

impl Step {
    pub fn loss(&self) -> f64 {
        self.head_losses.iter().sum()
    }
}

/// Single-owner training loop that can be advanced one epoch at a time.
#[derive(Debug, Clone)]
pub struct Trainer {
    net: Network,
    batch: Batch,
    lr: f64,
    state: OptimizerState,
    epoch: usize,
}

impl Trainer {
    pub fn new(net: Network, dataset: &LabeledDataset, cfg: &TrainConfig) -> Result<Self> {
        let batch = net.batch(dataset);
        Self::with_batch(net, batch, cfg)
    }

    pub fn with_batch(net: Network, batch: Batch, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let count = net.params().count();
        let state = match cfg.optimizer {
            OptimizerKind::Sgd => OptimizerState::Sgd,
            OptimizerKind::Adam => OptimizerState::Adam {
                m: vec![0.0; count],
                v: vec![0.0; count],
                t: 0,
            },
        };
        Ok(Self {
            net,
            batch,
            lr: cfg.learning_rate,
            state,
            epoch: 0,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn into_network(self) -> Network {
        self.net
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn step(&mut self) -> Result<Step> {
        let grads = backward_batch(&self.net, &self.batch)?;
        let lr = self.lr;
        match &mut self.state {
            OptimizerState::Sgd => {
                for (w, g) in self.net.params_mut().zip(grads.flat()) {
                    *w -= lr * g;
                }
            }
            OptimizerState::Adam { m, v, t } => {
                *t += 1;
                let c1 = 1.0 - ADAM_BETA1.powi(*t);
                let c2 = 1.0 - ADAM_BETA2.powi(*t);
                let params = self
                    .net
                    .params_mut()
                    .zip(grads.flat())
                    .zip(m.iter_mut().zip(v.iter_mut()));
                for ((w, &g), (m, v)) in params {
                    *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
                    *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *w -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
                }
            }
        }
        self.epoch += 1;
        let head_losses = head_losses(&self.net, &self.batch)?;
        let total: f64 = head_losses.iter().sum();
        if !total.is_finite() || !self.net.is_finite() {
            return Err(Error::Diverged {
                epoch: self.epoch,
                loss: total,
            });
        }
        Ok(Step {
            epoch: self.epoch,
            grads,
            head_losses,
        })
    }
}

/// Trained network plus per-epoch losses measured after each update.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub loss_trace: Vec<f64>,
    /// `head_loss_trace[k][e]`: head `k`'s loss after epoch `e + 1`.
    pub head_loss_trace: Vec<Vec<f64>>,
}

pub fn train(net: Network, dataset: &LabeledDataset, cfg: &TrainConfig) -> Result<TrainOutcome> {
    let heads = net.arch.output_dim;
    let mut trainer = Trainer::new(net, dataset, cfg)?;
    let mut loss_trace = Vec::with_capacity(cfg.epochs);
    let mut head_loss_trace = vec![Vec::with_capacity(cfg.epochs); heads];
    for _ in 0..cfg.epochs {
        let step = trainer.step()?;
        loss_trace.push(step.loss());
        for (trace, l) in head_loss_trace.iter_mut().zip(&step.head_losses) {
            trace.push(*l);
        }
    }
    Ok(TrainOutcome {
        network: trainer.into_network(),
        loss_trace,
        head_loss_trace,
    })
}
