//! Outcome indicators, correlations, the CHSH statistic, and the classical
//! bound obtained by enumerating deterministic local strategies.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ±1 correctness indicators for one head over the evaluation samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeVector {
    values: Vec<i8>,
}

impl OutcomeVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.abs() != 1) {
            return Err(Error::InvalidConfig(format!("outcome {v} is not +/-1")));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().map(|&v| f64::from(v)).sum::<f64>() / self.values.len() as f64
    }
}

/// `+1` where the prediction matches the label, `-1` otherwise.
pub fn outcomes(predictions: &[u8], labels: &[u8]) -> Result<OutcomeVector> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::InvalidConfig("empty outcome vector".into()));
    }
    let values = predictions
        .iter()
        .zip(labels)
        .map(|(p, l)| if p == l { 1 } else { -1 })
        .collect();
    Ok(OutcomeVector { values })
}

/// Mean of elementwise products, `<A * B>`.
pub fn correlation(a: &OutcomeVector, b: &OutcomeVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let sum: i64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| i64::from(x * y))
        .sum();
    Ok(sum as f64 / a.len() as f64)
}

/// Pearson coefficient. Undefined for constant vectors.
pub fn pearson(a: &OutcomeVector, b: &OutcomeVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let (ma, mb) = (a.mean(), b.mean());
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.values.iter().zip(&b.values) {
        let (dx, dy) = (f64::from(x) - ma, f64::from(y) - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateOutcome);
    }
    Ok(sab / (saa.sqrt() * sbb.sqrt()))
}

/// `C(A_i, B_j)` for the four settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationQuad {
    pub c11: f64,
    pub c12: f64,
    pub c21: f64,
    pub c22: f64,
}

impl CorrelationQuad {
    pub fn new(c11: f64, c12: f64, c21: f64, c22: f64) -> Self {
        Self { c11, c12, c21, c22 }
    }

    /// Values in canonical context order (1,1), (1,2), (2,1), (2,2).
    pub fn to_array(self) -> [f64; 4] {
        [self.c11, self.c12, self.c21, self.c22]
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|c| c.abs() <= 1.0)
    }
}

/// `S = C11 + C12 + C21 - C22`.
pub fn chsh_s(quad: &CorrelationQuad) -> f64 {
    quad.c11 + quad.c12 + quad.c21 - quad.c22
}

/// Quantum maximum of S, `2 * sqrt(2)`. Reference line only.
pub fn tsirelson_bound() -> f64 {
    2.0 * std::f64::consts::SQRT_2
}

/// Largest S any local hidden-variable model can reach.
pub const CLASSICAL_BOUND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextAccuracy {
    pub i: u8,
    pub j: u8,
    pub alice: f64,
    pub bob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultMeta {
    pub n: usize,
    pub seed: u64,
    pub config_hash: String,
}

/// Correlations, S, and per-context accuracies of one four-context run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshResult {
    pub quad: CorrelationQuad,
    pub s: f64,
    pub accuracies: [ContextAccuracy; 4],
    pub meta: ResultMeta,
}

impl ChshResult {
    pub fn is_consistent(&self) -> bool {
        self.s.to_bits() == chsh_s(&self.quad).to_bits() && self.s.abs() <= 4.0
    }
}

/// A deterministic local strategy: fixed ±1 answers for every setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LhvStrategy {
    pub a1: i8,
    pub a2: i8,
    pub b1: i8,
    pub b2: i8,
}

impl LhvStrategy {
    /// All 16 strategies; bit 3 of the index sets `a1`, bit 0 sets `b2`,
    /// a set bit meaning `-1`.
    pub fn all() -> Vec<LhvStrategy> {
        let sign = |k: usize, bit: usize| if (k >> bit) & 1 == 1 { -1 } else { 1 };
        (0..16)
            .map(|k| LhvStrategy {
                a1: sign(k, 3),
                a2: sign(k, 2),
                b1: sign(k, 1),
                b2: sign(k, 0),
            })
            .collect()
    }

    pub fn quad(&self) -> CorrelationQuad {
        let p = |a: i8, b: i8| f64::from(a * b);
        CorrelationQuad::new(
            p(self.a1, self.b1),
            p(self.a1, self.b2),
            p(self.a2, self.b1),
            p(self.a2, self.b2),
        )
    }

    pub fn s(&self) -> f64 {
        chsh_s(&self.quad())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LhvTable {
    pub rows: Vec<(LhvStrategy, f64)>,
    pub max_s: f64,
    pub argmax: Vec<LhvStrategy>,
    /// S is linear in the strategy weights, so a mixture's S is a convex
    /// combination of the vertex values and never exceeds `max_s`.
    pub note: &'static str,
}

impl LhvTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["a1", "a2", "b1", "b2", "S"])?;
        for (st, s) in &self.rows {
            w.write_record([
                st.a1.to_string(),
                st.a2.to_string(),
                st.b1.to_string(),
                st.b2.to_string(),
                format!("{s}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Enumerates every deterministic strategy and reports the maximum S.
pub fn lhv_enumerate() -> LhvTable {
    let rows: Vec<(LhvStrategy, f64)> = LhvStrategy::all()
        .into_iter()
        .map(|st| (st, st.s()))
        .collect();
    let max_s = rows
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let argmax = rows
        .iter()
        .filter(|(_, s)| *s == max_s)
        .map(|(st, _)| *st)
        .collect();
    LhvTable {
        rows,
        max_s,
        argmax,
        note: "mixtures of strategies give convex combinations of vertex S values and cannot exceed the maximum",
    }
}

/// Correlations induced by a probability mixture over [`LhvStrategy::all`].
pub fn mixture_quad(weights: &[f64]) -> Result<CorrelationQuad> {
    let strategies = LhvStrategy::all();
    if weights.len() != strategies.len() {
        return Err(Error::LengthMismatch {
            left: weights.len(),
            right: strategies.len(),
        });
    }
    let mut c = [0.0; 4];
    for (w, st) in weights.iter().zip(&strategies) {
        for (acc, v) in c.iter_mut().zip(st.quad().to_array()) {
            *acc += w * v;
        }
    }
    Ok(CorrelationQuad::from_array(c))
}
