use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::bell::{
    chsh_s, correlation, outcomes, ChshResult, ContextAccuracy, CorrelationQuad, ResultMeta,
};
use crate::error::{Error, Result};
use crate::neuralcore::{accuracy, init_network, train, ArchConfig, Network, TrainConfig};
use crate::tasklab::{enumerate_dataset, ContextPair};

/// SplitMix64 output function.
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `tag` under `parent`: `mix64(parent ^ mix64(tag))`.
pub fn derive_seed(parent: u64, tag: u64) -> u64 {
    mix64(parent ^ mix64(tag))
}

/// Initialization seed of the context in `slot` (0..4, canonical order).
pub fn context_seed(master_seed: u64, slot: usize) -> u64 {
    derive_seed(master_seed, slot as u64 + 1)
}

/// Master seed of repeat `repeat` at hidden size `n` in a sweep.
pub fn trial_seed(master_seed: u64, n: usize, repeat: usize) -> u64 {
    derive_seed(derive_seed(master_seed, n as u64), repeat as u64)
}

/// Short SHA-256 digest of the training config.
pub fn config_hash(cfg: &TrainConfig) -> String {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    let digest = Sha256::digest(&json);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn annotate(pair: &ContextPair, err: Error) -> Error {
    Error::Context {
        i: pair.i,
        j: pair.j,
        source: Box::new(err),
    }
}

/// Per-context evaluation of a trained network on all 16 samples.
#[derive(Debug, Clone)]
struct ContextEval {
    alice_outcomes: crate::bell::OutcomeVector,
    bob_outcomes: crate::bell::OutcomeVector,
    acc: ContextAccuracy,
}

fn evaluate(pair: &ContextPair, net: &Network) -> Result<ContextEval> {
    let dataset = enumerate_dataset(*pair);
    let preds = net.predict(&net.batch(&dataset))?;
    let alice_pred: Vec<u8> = preds.iter().map(|p| p[0]).collect();
    let bob_pred: Vec<u8> = preds.iter().map(|p| p[1]).collect();
    let (alice_labels, bob_labels) = (dataset.alice_labels(), dataset.bob_labels());
    Ok(ContextEval {
        alice_outcomes: outcomes(&alice_pred, &alice_labels)?,
        bob_outcomes: outcomes(&bob_pred, &bob_labels)?,
        acc: ContextAccuracy {
            i: pair.i,
            j: pair.j,
            alice: accuracy(&preds, &alice_labels, 0),
            bob: accuracy(&preds, &bob_labels, 1),
        },
    })
}

/// Builds the [`ChshResult`] for four networks in canonical context order.
pub fn evaluate_contexts(nets: &[Network], meta: ResultMeta) -> Result<ChshResult> {
    let pairs = ContextPair::all();
    if nets.len() != pairs.len() {
        return Err(Error::Shape(format!(
            "need 4 context networks, got {}",
            nets.len()
        )));
    }
    let mut c = [0.0; 4];
    let mut accs = Vec::with_capacity(4);
    for (pair, net) in pairs.iter().zip(nets) {
        let eval = evaluate(pair, net).map_err(|e| annotate(pair, e))?;
        c[pair.slot()] = correlation(&eval.alice_outcomes, &eval.bob_outcomes)?;
        accs.push(eval.acc);
    }
    let quad = CorrelationQuad::from_array(c);
    Ok(ChshResult {
        quad,
        s: chsh_s(&quad),
        accuracies: accs.try_into().expect("four contexts"),
        meta,
    })
}

/// A four-context run with the trained networks and final losses retained.
#[derive(Debug, Clone, Serialize)]
pub struct ContextRun {
    pub result: ChshResult,
    #[serde(skip)]
    pub networks: Vec<Network>,
    /// Final summed loss per context, canonical order.
    pub final_losses: [f64; 4],
}

/// Trains one network for `pair` from its context seed.
pub fn train_context(
    n: usize,
    master_seed: u64,
    pair: &ContextPair,
    cfg: &TrainConfig,
) -> Result<(Network, f64)> {
    let seed = context_seed(master_seed, pair.slot());
    let run = || -> Result<(Network, f64)> {
        let net = init_network(ArchConfig::ncnet(n).with_encoding(cfg.input_encoding), seed)?;
        let cfg = TrainConfig { seed, ..*cfg };
        let out = train(net, &enumerate_dataset(*pair), &cfg)?;
        let last = *out.loss_trace.last().expect("epochs >= 1");
        Ok((out.network, last))
    };
    run().map_err(|e| annotate(pair, e))
}

/// Trains the four contexts in the given order and evaluates them.
pub fn run_contexts_in_order(
    n: usize,
    master_seed: u64,
    cfg: &TrainConfig,
    order: [usize; 4],
) -> Result<ContextRun> {
    if n == 0 {
        return Err(Error::InvalidConfig("hidden size must be >= 1".into()));
    }
    cfg.validate()?;
    let pairs = ContextPair::all();
    let mut slots: [Option<(Network, f64)>; 4] = Default::default();
    for slot in order {
        slots[slot] = Some(train_context(n, master_seed, &pairs[slot], cfg)?);
    }
    let (networks, losses): (Vec<Network>, Vec<f64>) = slots
        .into_iter()
        .map(|s| {
            s.ok_or_else(|| Error::InvalidConfig("context order must be a permutation".into()))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let meta = ResultMeta {
        n,
        seed: master_seed,
        config_hash: config_hash(cfg),
    };
    let result = evaluate_contexts(&networks, meta)?;
    Ok(ContextRun {
        result,
        networks,
        final_losses: losses.try_into().expect("four contexts"),
    })
}

pub fn run_contexts_detailed(n: usize, master_seed: u64, cfg: &TrainConfig) -> Result<ContextRun> {
    run_contexts_in_order(n, master_seed, cfg, [0, 1, 2, 3])
}

/// Trains one independent network per canonical context and computes S.
pub fn run_contexts(n: usize, master_seed: u64, cfg: &TrainConfig) -> Result<ChshResult> {
    Ok(run_contexts_detailed(n, master_seed, cfg)?.result)
}
