use std::io::Write;

use serde::{Deserialize, Serialize};

use super::protocol::{annotate, config_hash, context_seed, evaluate_contexts};
use crate::bell::ResultMeta;
use crate::error::{Error, Result};
use crate::neuralcore::{init_network, ArchConfig, TrainConfig, Trainer};
use crate::tasklab::{enumerate_dataset, ContextPair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub epoch: usize,
    pub s: f64,
    /// Summed loss per context, canonical order.
    pub losses: [f64; 4],
}

/// S sampled during lockstep training of the four contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    points: Vec<TracePoint>,
}

impl EpochTrace {
    pub fn new(points: Vec<TracePoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].epoch <= w[0].epoch) {
            return Err(Error::InvalidConfig(
                "trace epochs must be strictly increasing".into(),
            ));
        }
        if points.iter().any(|p| !p.s.is_finite()) {
            return Err(Error::InvalidConfig("trace S values must be finite".into()));
        }
        Ok(Self { points })
    }

    /// Trace of bare `(epoch, S)` pairs with zero losses.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(epoch, s)| TracePoint {
                    epoch,
                    s,
                    losses: [0.0; 4],
                })
                .collect(),
        )
    }

    pub fn points(&self) -> &[TracePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn final_s(&self) -> Option<f64> {
        self.points.last().map(|p| p.s)
    }

    pub fn max_s(&self) -> Option<f64> {
        self.points.iter().map(|p| p.s).reduce(f64::max)
    }

    /// CSV with header `epoch,s,loss_a1b1,loss_a1b2,loss_a2b1,loss_a2b2`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "epoch",
            "s",
            "loss_a1b1",
            "loss_a1b2",
            "loss_a2b1",
            "loss_a2b2",
        ])?;
        for p in &self.points {
            let mut rec = vec![p.epoch.to_string(), p.s.to_string()];
            rec.extend(p.losses.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Trains the four context networks round-robin, one epoch each per tick,
/// and records S every `stride` epochs plus at the final epoch.
pub fn epoch_trace(
    n: usize,
    master_seed: u64,
    cfg: &TrainConfig,
    stride: usize,
) -> Result<EpochTrace> {
    if stride == 0 {
        return Err(Error::InvalidConfig("trace stride must be >= 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("hidden size must be >= 1".into()));
    }
    cfg.validate()?;
    let pairs = ContextPair::all();
    let mut trainers = pairs
        .iter()
        .map(|pair| {
            let seed = context_seed(master_seed, pair.slot());
            let net = init_network(ArchConfig::ncnet(n).with_encoding(cfg.input_encoding), seed)?;
            Trainer::new(
                net,
                &enumerate_dataset(*pair),
                &TrainConfig { seed, ..*cfg },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let meta = ResultMeta {
        n,
        seed: master_seed,
        config_hash: config_hash(cfg),
    };

    let mut points = Vec::with_capacity(cfg.epochs / stride + 1);
    for epoch in 1..=cfg.epochs {
        let mut losses = [0.0; 4];
        for (pair, trainer) in pairs.iter().zip(trainers.iter_mut()) {
            losses[pair.slot()] = trainer.step().map_err(|e| annotate(pair, e))?.loss();
        }
        if epoch % stride == 0 || epoch == cfg.epochs {
            let nets: Vec<_> = trainers.iter().map(|t| t.network().clone()).collect();
            let result = evaluate_contexts(&nets, meta.clone())?;
            points.push(TracePoint {
                epoch,
                s: result.s,
                losses,
            });
        }
    }
    EpochTrace::new(points)
}

/// Mean of the instantaneous slopes of S over a window of epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeSummary {
    pub mu_grad_s: f64,
    /// `(S_last - S_first) / (epoch_last - epoch_first)`; equals
    /// `mu_grad_s` when the points are evenly spaced.
    pub telescoped: f64,
    pub window: (usize, usize),
    pub points: usize,
    pub uniform_spacing: bool,
}

pub fn mean_slope(trace: &EpochTrace, window: (usize, usize)) -> Result<SlopeSummary> {
    let (start, end) = window;
    let pts: Vec<&TracePoint> = trace
        .points
        .iter()
        .filter(|p| p.epoch >= start && p.epoch <= end)
        .collect();
    if pts.len() < 2 {
        return Err(Error::Window {
            start,
            end,
            points: pts.len(),
        });
    }
    let slopes: Vec<f64> = pts
        .windows(2)
        .map(|w| (w[1].s - w[0].s) / (w[1].epoch - w[0].epoch) as f64)
        .collect();
    let mu_grad_s = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    let telescoped = (last.s - first.s) / (last.epoch - first.epoch) as f64;
    let step = pts[1].epoch - pts[0].epoch;
    let uniform_spacing = pts.windows(2).all(|w| w[1].epoch - w[0].epoch == step);
    Ok(SlopeSummary {
        mu_grad_s,
        telescoped,
        window,
        points: pts.len(),
        uniform_spacing,
    })
}
