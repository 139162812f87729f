//! Capacity sweeps: R repeats of the four-context run for each hidden size.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::protocol::{config_hash, run_contexts_detailed, trial_seed};
use super::trace::epoch_trace;
use crate::bell::{chsh_s, ChshResult, CorrelationQuad};
use crate::error::{Error, Result};
use crate::neuralcore::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub master_seed: u64,
    pub repeats: usize,
    pub hidden_sizes: Vec<usize>,
    /// Stride of an epoch trace kept per trial; 0 records only the final S.
    #[serde(default)]
    pub trace_every: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            master_seed: 42,
            repeats: 50,
            hidden_sizes: vec![2, 3, 4],
            trace_every: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::InvalidConfig("repeats must be >= 1".into()));
        }
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "hidden sizes must be a nonempty list of values >= 1, got {:?}",
                self.hidden_sizes
            )));
        }
        self.train.validate()
    }
}

/// One `(n, repeat)` trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub n: usize,
    pub repeat: usize,
    pub seed: u64,
    /// The run's result, or the error message of a failed trial.
    pub outcome: std::result::Result<ChshResult, String>,
    pub final_losses: Option<[f64; 4]>,
    /// Largest S over the trial's epoch trace, when one was recorded.
    pub max_trace_s: Option<f64>,
    pub wall_time_secs: f64,
}

impl SweepRecord {
    pub fn s(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_s: f64,
    pub median_s: f64,
    pub frac_gt2: f64,
    pub max_s: f64,
    pub mean_quad: CorrelationQuad,
}

fn median(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    }
}

/// Summary of one hidden size's successful records. `None` if all failed.
pub fn aggregate(n: usize, records: &[&SweepRecord]) -> Option<Aggregate> {
    let ok: Vec<&ChshResult> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    if ok.is_empty() {
        return None;
    }
    let count = ok.len() as f64;
    let mut s: Vec<f64> = ok.iter().map(|r| r.s).collect();
    let mean_s = s.iter().sum::<f64>() / count;
    let frac_gt2 = s.iter().filter(|&&v| v > 2.0).count() as f64 / count;
    s.sort_by(f64::total_cmp);
    let mut quad = [0.0; 4];
    for r in &ok {
        for (acc, c) in quad.iter_mut().zip(r.quad.to_array()) {
            *acc += c;
        }
    }
    Some(Aggregate {
        n,
        runs: ok.len(),
        failures: records.len() - ok.len(),
        mean_s,
        median_s: median(&s),
        frac_gt2,
        max_s: s[s.len() - 1],
        mean_quad: CorrelationQuad::from_array(quad.map(|c| c / count)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// Sorted by `(n, repeat)`.
    pub records: Vec<SweepRecord>,
    pub aggregates: Vec<Aggregate>,
}

fn run_trial(cfg: &ExperimentConfig, n: usize, repeat: usize) -> SweepRecord {
    let seed = trial_seed(cfg.master_seed, n, repeat);
    let start = Instant::now();
    let mut record = SweepRecord {
        n,
        repeat,
        seed,
        outcome: Err(String::new()),
        final_losses: None,
        max_trace_s: None,
        wall_time_secs: 0.0,
    };
    match run_contexts_detailed(n, seed, &cfg.train) {
        Ok(run) => {
            record.final_losses = Some(run.final_losses);
            record.outcome = Ok(run.result);
        }
        Err(e) => record.outcome = Err(e.to_string()),
    }
    if cfg.trace_every > 0 && record.outcome.is_ok() {
        match epoch_trace(n, seed, &cfg.train, cfg.trace_every) {
            Ok(trace) => record.max_trace_s = trace.max_s(),
            Err(e) => record.outcome = Err(e.to_string()),
        }
    }
    record.wall_time_secs = start.elapsed().as_secs_f64();
    record
}

/// Runs every `(n, repeat)` trial on `workers` threads.
///
/// Each trial's seed depends only on `(master_seed, n, repeat)`, so the
/// records do not depend on the worker count. Failed trials are kept as
/// rows with an error status.
pub fn sweep(cfg: &ExperimentConfig, workers: usize) -> Result<SweepOutput> {
    cfg.validate()?;
    let jobs: Vec<(usize, usize)> = cfg
        .hidden_sizes
        .iter()
        .flat_map(|&n| (0..cfg.repeats).map(move |r| (n, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let mut records: Vec<SweepRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, r)| run_trial(cfg, n, r))
            .collect()
    });
    records.sort_by_key(|r| (r.n, r.repeat));

    let mut by_n: BTreeMap<usize, Vec<&SweepRecord>> = BTreeMap::new();
    for r in &records {
        by_n.entry(r.n).or_default().push(r);
    }
    let aggregates = by_n
        .iter()
        .filter_map(|(&n, rs)| aggregate(n, rs))
        .collect();
    Ok(SweepOutput {
        config: cfg.clone(),
        config_hash: config_hash(&cfg.train),
        records,
        aggregates,
    })
}

pub const SWEEP_CSV_HEADER: [&str; 17] = [
    "n",
    "repeat",
    "seed",
    "c11",
    "c12",
    "c21",
    "c22",
    "s",
    "acc_a1b1_alice",
    "acc_a1b1_bob",
    "acc_a1b2_alice",
    "acc_a1b2_bob",
    "acc_a2b1_alice",
    "acc_a2b1_bob",
    "acc_a2b2_alice",
    "acc_a2b2_bob",
    "status",
];

impl SweepOutput {
    pub fn aggregate_for(&self, n: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.n == n)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SWEEP_CSV_HEADER)?;
        for r in &self.records {
            let mut row = vec![r.n.to_string(), r.repeat.to_string(), r.seed.to_string()];
            match &r.outcome {
                Ok(res) => {
                    row.extend(res.quad.to_array().iter().map(f64::to_string));
                    row.push(res.s.to_string());
                    for acc in &res.accuracies {
                        row.push(acc.alice.to_string());
                        row.push(acc.bob.to_string());
                    }
                    row.push("ok".into());
                }
                Err(msg) => {
                    row.extend(std::iter::repeat_n(String::new(), 13));
                    row.push(format!("error: {msg}"));
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-n aggregates keyed by n.
    pub fn aggregate_json(&self, manifest_hash: Option<&str>) -> serde_json::Value {
        let per_n: serde_json::Map<String, serde_json::Value> = self
            .aggregates
            .iter()
            .map(|a| {
                (
                    a.n.to_string(),
                    serde_json::json!({
                        "mean_s": a.mean_s,
                        "median_s": a.median_s,
                        "frac_gt2": a.frac_gt2,
                        "max_s": a.max_s,
                        "runs": a.runs,
                        "failures": a.failures,
                        "mean_quad": a.mean_quad,
                    }),
                )
            })
            .collect();
        serde_json::json!({
            "manifest_hash": manifest_hash,
            "config_hash": self.config_hash,
            "per_n": per_n,
        })
    }
}

/// A row read back from a sweep CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub repeat: usize,
    pub seed: u64,
    pub quad: Option<CorrelationQuad>,
    pub s: Option<f64>,
    pub status: String,
}

/// Parses a sweep CSV, checking the header and that each `s` equals the
/// CHSH combination of its row's correlations.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(SWEEP_CSV_HEADER.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            msg: "unexpected sweep CSV header".into(),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec?;
        let bad = |msg: String| Error::Parse { line, msg };
        let int = |i: usize| {
            rec[i]
                .parse::<u64>()
                .map_err(|e| bad(format!("{}: {e}", SWEEP_CSV_HEADER[i])))
        };
        let status = rec[16].to_string();
        let (quad, s) = if status == "ok" {
            let f = |i: usize| {
                rec[i]
                    .parse::<f64>()
                    .map_err(|e| bad(format!("{}: {e}", SWEEP_CSV_HEADER[i])))
            };
            let quad = CorrelationQuad::new(f(3)?, f(4)?, f(5)?, f(6)?);
            let s = f(7)?;
            if s != chsh_s(&quad) {
                return Err(bad(format!("s = {s} disagrees with its correlations")));
            }
            (Some(quad), Some(s))
        } else {
            (None, None)
        };
        rows.push(SweepRow {
            n: int(0)? as usize,
            repeat: int(1)? as usize,
            seed: int(2)?,
            quad,
            s,
            status,
        });
    }
    Ok(rows)
}
