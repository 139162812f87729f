//! Binary tasks over four input bits and the exhaustive labelled dataset.
//!
//! Alice's tasks are `x1` and `x1 ^ x2`; Bob's are `x3` and `x3 ^ x4`. The
//! dataset is all 16 input patterns, so averages over it are exact
//! expectations under a uniform input distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of input bits.
pub const INPUT_BITS: usize = 4;
/// Number of distinct inputs.
pub const SAMPLE_COUNT: usize = 1 << INPUT_BITS;

/// One input pattern `(x1, x2, x3, x4)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitSample {
    bits: [u8; INPUT_BITS],
}

impl BitSample {
    pub fn new(x1: u8, x2: u8, x3: u8, x4: u8) -> Result<Self> {
        let bits = [x1, x2, x3, x4];
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidTask(format!(
                "sample bits must be 0/1, got {bits:?}"
            )));
        }
        Ok(Self { bits })
    }

    /// Sample whose bits spell `index` with `x1` as the most significant bit.
    pub fn from_index(index: usize) -> Self {
        assert!(index < SAMPLE_COUNT, "sample index {index} out of range");
        let mut bits = [0u8; INPUT_BITS];
        for (k, b) in bits.iter_mut().enumerate() {
            *b = ((index >> (INPUT_BITS - 1 - k)) & 1) as u8;
        }
        Self { bits }
    }

    /// Inverse of [`BitSample::from_index`]: `x1*8 + x2*4 + x3*2 + x4`.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    /// Bit `x_k` for `k` in 1..=4.
    pub fn bit(&self, k: usize) -> u8 {
        self.bits[k - 1]
    }

    pub fn bits(&self) -> [u8; INPUT_BITS] {
        self.bits
    }

    /// Network input: bits as 0.0 / 1.0, uncentred.
    pub fn as_input(&self) -> [f64; INPUT_BITS] {
        self.bits.map(f64::from)
    }

    pub fn encode(&self, encoding: InputEncoding) -> [f64; INPUT_BITS] {
        match encoding {
            InputEncoding::Binary => self.as_input(),
            InputEncoding::Signed => self.bits.map(|b| if b == 1 { 1.0 } else { -1.0 }),
        }
    }
}

/// How bits are presented to the first layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InputEncoding {
    /// 0.0 / 1.0.
    Binary,
    /// -1.0 / +1.0.
    #[default]
    Signed,
}

impl std::str::FromStr for InputEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(Self::Binary),
            "signed" => Ok(Self::Signed),
            other => Err(Error::InvalidConfig(format!(
                "unknown input encoding {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    Identity { source: u8 },
    Xor { a: u8, b: u8 },
}

/// A binary task over a [`BitSample`]. Indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TaskKind", into = "TaskKind")]
pub struct TaskSpec {
    kind: TaskKind,
}

fn valid_index(k: u8) -> bool {
    (1..=INPUT_BITS as u8).contains(&k)
}

impl TaskSpec {
    /// Alice, setting 1: `x1`.
    pub const ALPHA1: TaskSpec = TaskSpec {
        kind: TaskKind::Identity { source: 1 },
    };
    /// Alice, setting 2: `x1 ^ x2`.
    pub const ALPHA2: TaskSpec = TaskSpec {
        kind: TaskKind::Xor { a: 1, b: 2 },
    };
    /// Bob, setting 1: `x3`.
    pub const BETA1: TaskSpec = TaskSpec {
        kind: TaskKind::Identity { source: 3 },
    };
    /// Bob, setting 2: `x3 ^ x4`.
    pub const BETA2: TaskSpec = TaskSpec {
        kind: TaskKind::Xor { a: 3, b: 4 },
    };

    pub fn identity(source: u8) -> Result<Self> {
        Self::try_from(TaskKind::Identity { source })
    }

    pub fn xor(a: u8, b: u8) -> Result<Self> {
        Self::try_from(TaskKind::Xor { a, b })
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }
}

impl TryFrom<TaskKind> for TaskSpec {
    type Error = Error;

    fn try_from(kind: TaskKind) -> Result<Self> {
        match kind {
            TaskKind::Identity { source } if valid_index(source) => Ok(Self { kind }),
            TaskKind::Xor { a, b } if valid_index(a) && valid_index(b) && a != b => {
                Ok(Self { kind })
            }
            other => Err(Error::InvalidTask(format!("{other:?}"))),
        }
    }
}

impl From<TaskSpec> for TaskKind {
    fn from(t: TaskSpec) -> Self {
        t.kind
    }
}

impl std::fmt::Display for TaskSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            TaskKind::Identity { source } => write!(f, "x{source}"),
            TaskKind::Xor { a, b } => write!(f, "x{a}^x{b}"),
        }
    }
}

pub fn eval_task(task: TaskSpec, sample: BitSample) -> u8 {
    match task.kind {
        TaskKind::Identity { source } => sample.bit(source as usize),
        TaskKind::Xor { a, b } => sample.bit(a as usize) ^ sample.bit(b as usize),
    }
}

/// One measurement context: an Alice task, a Bob task, and their setting
/// indices `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContextPair {
    pub alice: TaskSpec,
    pub bob: TaskSpec,
    pub i: u8,
    pub j: u8,
}

impl ContextPair {
    /// Canonical context `(alpha_i, beta_j)` for `i, j` in {1, 2}.
    pub fn canonical(i: u8, j: u8) -> Result<Self> {
        let alice = match i {
            1 => TaskSpec::ALPHA1,
            2 => TaskSpec::ALPHA2,
            _ => {
                return Err(Error::InvalidTask(format!(
                    "alice setting {i} not in {{1,2}}"
                )))
            }
        };
        let bob = match j {
            1 => TaskSpec::BETA1,
            2 => TaskSpec::BETA2,
            _ => {
                return Err(Error::InvalidTask(format!(
                    "bob setting {j} not in {{1,2}}"
                )))
            }
        };
        Ok(Self { alice, bob, i, j })
    }

    /// The four canonical contexts in order (1,1), (1,2), (2,1), (2,2).
    pub fn all() -> [ContextPair; 4] {
        [(1, 1), (1, 2), (2, 1), (2, 2)].map(|(i, j)| Self::canonical(i, j).unwrap())
    }

    /// Position of this context in [`ContextPair::all`].
    pub fn slot(&self) -> usize {
        (self.i as usize - 1) * 2 + (self.j as usize - 1)
    }

    /// Short tag such as `a1b2`.
    pub fn tag(&self) -> String {
        format!("a{}b{}", self.i, self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledRow {
    pub sample: BitSample,
    pub alice_label: u8,
    pub bob_label: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub pair: ContextPair,
    pub rows: Vec<LabeledRow>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn alice_labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.alice_label).collect()
    }

    pub fn bob_labels(&self) -> Vec<u8> {
        self.rows.iter().map(|r| r.bob_label).collect()
    }
}

/// All 16 samples in ascending index order, labelled by `pair`.
pub fn enumerate_dataset(pair: ContextPair) -> LabeledDataset {
    let rows = (0..SAMPLE_COUNT)
        .map(BitSample::from_index)
        .map(|sample| LabeledRow {
            sample,
            alice_label: eval_task(pair.alice, sample),
            bob_label: eval_task(pair.bob, sample),
        })
        .collect();
    LabeledDataset { pair, rows }
}
