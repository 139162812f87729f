use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tasklab::{BitSample, InputEncoding, LabeledDataset, INPUT_BITS};

/// Probability clamp used by the cross-entropy loss.
pub const PROB_EPS: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum HiddenActivation {
    #[default]
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OutputActivation {
    #[default]
    Sigmoid,
}

/// One hidden layer of `hidden_size` ReLU units between `input_dim` inputs
/// and `output_dim` sigmoid heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchConfig {
    pub input_dim: usize,
    pub hidden_size: usize,
    pub output_dim: usize,
    #[serde(default)]
    pub hidden_activation: HiddenActivation,
    #[serde(default)]
    pub output_activation: OutputActivation,
    #[serde(default)]
    pub input_encoding: InputEncoding,
}

impl ArchConfig {
    /// 4 inputs, `n` shared hidden units, Alice and Bob heads.
    pub fn ncnet(n: usize) -> Self {
        Self {
            input_dim: INPUT_BITS,
            hidden_size: n,
            output_dim: 2,
            hidden_activation: HiddenActivation::Relu,
            output_activation: OutputActivation::Sigmoid,
            input_encoding: InputEncoding::default(),
        }
    }

    pub fn with_encoding(self, input_encoding: InputEncoding) -> Self {
        Self {
            input_encoding,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_size == 0 || self.output_dim == 0 {
            return Err(Error::InvalidConfig(format!(
                "layer widths must be >= 1, got {}x{}x{}",
                self.input_dim, self.hidden_size, self.output_dim
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.hidden_size * (self.input_dim + 1) + self.output_dim * (self.hidden_size + 1)
    }
}

/// Dense weights. Matrices are stored row-major: `w1[h * input_dim + i]`
/// and `w2[k * hidden_size + h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub arch: ArchConfig,
    pub seed: u64,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Glorot-uniform weights and zero biases.
///
/// Draws come from ChaCha8 seeded with `seed` (`ChaCha8Rng::seed_from_u64`),
/// W1 row-major first, then W2 row-major. Each layer samples uniformly from
/// `[-sqrt(6 / (fan_in + fan_out)), +sqrt(6 / (fan_in + fan_out))]`.
pub fn init_network(arch: ArchConfig, seed: u64) -> Result<Network> {
    arch.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layer = |fan_in: usize, fan_out: usize| -> Vec<f64> {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite positive limit");
        (0..fan_in * fan_out)
            .map(|_| dist.sample(&mut rng))
            .collect()
    };
    let w1 = layer(arch.input_dim, arch.hidden_size);
    let w2 = layer(arch.hidden_size, arch.output_dim);
    Ok(Network {
        arch,
        seed,
        w1,
        b1: vec![0.0; arch.hidden_size],
        w2,
        b2: vec![0.0; arch.output_dim],
    })
}

/// Activations from a single forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub pre_hidden: Vec<f64>,
    pub hidden: Vec<f64>,
    pub probs: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Training inputs and 0/1 targets, one target per output head.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<u8>>,
}

impl Batch {
    /// Two-head batch for a labelled dataset.
    pub fn from_dataset(d: &LabeledDataset, encoding: InputEncoding) -> Self {
        Self {
            inputs: d
                .rows
                .iter()
                .map(|r| r.sample.encode(encoding).to_vec())
                .collect(),
            targets: d
                .rows
                .iter()
                .map(|r| vec![r.alice_label, r.bob_label])
                .collect(),
        }
    }
}

impl Network {
    pub fn hidden_size(&self) -> usize {
        self.arch.hidden_size
    }

    pub fn activate(&self, x: &[f64]) -> Result<Activations> {
        let (d, n, o) = (
            self.arch.input_dim,
            self.arch.hidden_size,
            self.arch.output_dim,
        );
        if x.len() != d {
            return Err(Error::Shape(format!(
                "input has {} features, expected {d}",
                x.len()
            )));
        }
        let mut pre_hidden = Vec::with_capacity(n);
        for h in 0..n {
            let row = &self.w1[h * d..(h + 1) * d];
            let z = row
                .iter()
                .zip(x)
                .fold(self.b1[h], |acc, (w, v)| acc + w * v);
            pre_hidden.push(z);
        }
        let hidden: Vec<f64> = pre_hidden.iter().map(|&z| z.max(0.0)).collect();
        let mut probs = Vec::with_capacity(o);
        for k in 0..o {
            let row = &self.w2[k * n..(k + 1) * n];
            let z = row
                .iter()
                .zip(&hidden)
                .fold(self.b2[k], |acc, (w, v)| acc + w * v);
            if !z.is_finite() {
                return Err(Error::NumericalOverflow(format!(
                    "output {k} pre-activation = {z}"
                )));
            }
            probs.push(sigmoid(z));
        }
        Ok(Activations {
            pre_hidden,
            hidden,
            probs,
        })
    }

    /// `(alice_prob, bob_prob, hidden)` for a two-head network.
    pub fn forward(&self, sample: BitSample) -> Result<(f64, f64, Vec<f64>)> {
        if self.arch.output_dim != 2 {
            return Err(Error::Shape(format!(
                "expected 2 heads, have {}",
                self.arch.output_dim
            )));
        }
        let a = self.activate(&sample.encode(self.arch.input_encoding))?;
        Ok((a.probs[0], a.probs[1], a.hidden))
    }

    /// Batch for `d` using this network's input encoding.
    pub fn batch(&self, d: &LabeledDataset) -> Batch {
        Batch::from_dataset(d, self.arch.input_encoding)
    }

    /// Hard 0/1 predictions for every row; label 1 iff p > 0.5.
    pub fn predict(&self, batch: &Batch) -> Result<Vec<Vec<u8>>> {
        batch
            .inputs
            .iter()
            .map(|x| {
                Ok(self
                    .activate(x)?
                    .probs
                    .iter()
                    .map(|&p| u8::from(p > 0.5))
                    .collect())
            })
            .collect()
    }

    /// All parameters in the fixed order W1, b1, W2, b2.
    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.w1
            .iter_mut()
            .chain(self.b1.iter_mut())
            .chain(self.w2.iter_mut())
            .chain(self.b2.iter_mut())
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }

    /// True when both networks hold bitwise-identical parameters.
    pub fn bitwise_eq(&self, other: &Network) -> bool {
        self.arch == other.arch
            && self.params().count() == other.params().count()
            && self
                .params()
                .zip(other.params())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_batch(net: &Network, batch: &Batch) -> Result<()> {
    if batch.inputs.len() != batch.targets.len() || batch.inputs.is_empty() {
        return Err(Error::Shape(format!(
            "{} inputs vs {} targets",
            batch.inputs.len(),
            batch.targets.len()
        )));
    }
    if let Some(t) = batch
        .targets
        .iter()
        .find(|t| t.len() != net.arch.output_dim)
    {
        return Err(Error::Shape(format!(
            "target has {} heads, network has {}",
            t.len(),
            net.arch.output_dim
        )));
    }
    Ok(())
}

fn bce(p: f64, y: u8) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    if y == 1 {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Per-head mean binary cross-entropy.
pub fn head_losses(net: &Network, batch: &Batch) -> Result<Vec<f64>> {
    check_batch(net, batch)?;
    let mut sums = vec![0.0; net.arch.output_dim];
    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let a = net.activate(x)?;
        for (k, s) in sums.iter_mut().enumerate() {
            *s += bce(a.probs[k], t[k]);
        }
    }
    let rows = batch.inputs.len() as f64;
    Ok(sums.into_iter().map(|s| s / rows).collect())
}

/// Summed per-head mean BCE: `L_alice + L_bob`.
pub fn loss(net: &Network, dataset: &LabeledDataset) -> Result<f64> {
    Ok(head_losses(net, &net.batch(dataset))?.iter().sum())
}

/// Gradients of the summed loss, with the hidden-layer gradient split into
/// the contribution of each head's loss term.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub dw1: Vec<f64>,
    pub db1: Vec<f64>,
    pub dw2: Vec<f64>,
    pub db2: Vec<f64>,
    /// `dw1_heads[k]` is d(L_k)/dW1.
    pub dw1_heads: Vec<Vec<f64>>,
    pub db1_heads: Vec<Vec<f64>>,
    pub head_losses: Vec<f64>,
}

impl GradientSet {
    pub fn dw1_alice(&self) -> &[f64] {
        &self.dw1_heads[0]
    }

    pub fn dw1_bob(&self) -> &[f64] {
        &self.dw1_heads[1]
    }

    pub fn db1_alice(&self) -> &[f64] {
        &self.db1_heads[0]
    }

    pub fn db1_bob(&self) -> &[f64] {
        &self.db1_heads[1]
    }

    pub fn loss(&self) -> f64 {
        self.head_losses.iter().sum()
    }

    /// Flattened in the same order as [`Network::params`].
    pub fn flat(&self) -> impl Iterator<Item = &f64> {
        self.dw1
            .iter()
            .chain(&self.db1)
            .chain(&self.dw2)
            .chain(&self.db2)
    }

    pub fn norm(&self) -> f64 {
        self.flat().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Head `k`'s gradient on hidden unit `h`'s incoming weights and bias.
    pub fn unit_contribution(&self, head: usize, h: usize) -> Vec<f64> {
        let d = self.dw1.len() / self.db1.len();
        let mut v = self.dw1_heads[head][h * d..(h + 1) * d].to_vec();
        v.push(self.db1_heads[head][h]);
        v
    }
}

pub fn backward_batch(net: &Network, batch: &Batch) -> Result<GradientSet> {
    check_batch(net, batch)?;
    let (d, n, o) = (
        net.arch.input_dim,
        net.arch.hidden_size,
        net.arch.output_dim,
    );
    let rows = batch.inputs.len() as f64;
    let mut dw2 = vec![0.0; o * n];
    let mut db2 = vec![0.0; o];
    let mut dw1_heads = vec![vec![0.0; n * d]; o];
    let mut db1_heads = vec![vec![0.0; n]; o];
    let mut sums = vec![0.0; o];

    for (x, t) in batch.inputs.iter().zip(&batch.targets) {
        let a = net.activate(x)?;
        for k in 0..o {
            let p = a.probs[k];
            sums[k] += bce(p, t[k]);
            // The clamp flattens the loss outside [eps, 1 - eps].
            let delta = if (PROB_EPS..=1.0 - PROB_EPS).contains(&p) {
                (p - f64::from(t[k])) / rows
            } else {
                0.0
            };
            for h in 0..n {
                dw2[k * n + h] += delta * a.hidden[h];
            }
            db2[k] += delta;
            for h in 0..n {
                if a.pre_hidden[h] <= 0.0 {
                    continue;
                }
                let dz = delta * net.w2[k * n + h];
                for i in 0..d {
                    dw1_heads[k][h * d + i] += dz * x[i];
                }
                db1_heads[k][h] += dz;
            }
        }
    }

    let sum_heads = |parts: &[Vec<f64>]| -> Vec<f64> {
        let mut out = parts[0].clone();
        for part in &parts[1..] {
            out.iter_mut().zip(part).for_each(|(a, b)| *a += b);
        }
        out
    };
    let grads = GradientSet {
        dw1: sum_heads(&dw1_heads),
        db1: sum_heads(&db1_heads),
        dw2,
        db2,
        dw1_heads,
        db1_heads,
        head_losses: sums.into_iter().map(|s| s / rows).collect(),
    };
    if let Some(g) = grads.flat().find(|g| !g.is_finite()) {
        return Err(Error::NumericalOverflow(format!("non-finite gradient {g}")));
    }
    Ok(grads)
}

/// Exact gradients of [`loss`] for a labelled dataset.
pub fn backward(net: &Network, dataset: &LabeledDataset) -> Result<GradientSet> {
    backward_batch(net, &net.batch(dataset))
}

// JSON document with weights as shortest round-trip decimal strings.

const NETWORK_DOC_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    version: u32,
    arch: ArchConfig,
    seed: u64,
    #[serde(rename = "W1")]
    w1: Vec<Vec<String>>,
    b1: Vec<String>,
    #[serde(rename = "W2")]
    w2: Vec<Vec<String>>,
    b2: Vec<String>,
}

fn to_strings(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:?}")).collect()
}

fn parse_floats(v: &[String]) -> Result<Vec<f64>> {
    v.iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Error::InvalidConfig(format!("bad weight {s:?}: {e}")))
        })
        .collect()
}

impl Network {
    pub fn to_json(&self) -> Result<String> {
        let (d, n) = (self.arch.input_dim, self.arch.hidden_size);
        let doc = NetworkDoc {
            version: NETWORK_DOC_VERSION,
            arch: self.arch,
            seed: self.seed,
            w1: self.w1.chunks(d).map(to_strings).collect(),
            b1: to_strings(&self.b1),
            w2: self.w2.chunks(n).map(to_strings).collect(),
            b2: to_strings(&self.b2),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(text)?;
        if doc.version != NETWORK_DOC_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported network version {}",
                doc.version
            )));
        }
        doc.arch.validate()?;
        let flatten = |rows: &[Vec<String>]| -> Result<Vec<f64>> {
            Ok(rows
                .iter()
                .map(|r| parse_floats(r))
                .collect::<Result<Vec<_>>>()?
                .concat())
        };
        let net = Network {
            arch: doc.arch,
            seed: doc.seed,
            w1: flatten(&doc.w1)?,
            b1: parse_floats(&doc.b1)?,
            w2: flatten(&doc.w2)?,
            b2: parse_floats(&doc.b2)?,
        };
        let (d, n, o) = (
            net.arch.input_dim,
            net.arch.hidden_size,
            net.arch.output_dim,
        );
        if net.w1.len() != n * d || net.b1.len() != n || net.w2.len() != o * n || net.b2.len() != o
        {
            return Err(Error::Shape("weight shapes disagree with arch".into()));
        }
        Ok(net)
    }
}
