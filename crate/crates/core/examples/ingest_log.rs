//! Scores an externally produced correctness log. Without an argument a
//! small synthetic log is generated and scored instead.
//!
//!     cargo run --example ingest_log -- predictions.jsonl

use ncnet::ingest::{parse_log, report, LogFormat, LogRow, OutcomeLog, RegimeThresholds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn synthetic() -> ncnet::Result<OutcomeLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = Vec::new();
    for (i, j, p) in [(1, 1, 0.97), (1, 2, 0.9), (2, 1, 0.92), (2, 2, 0.6)] {
        for k in 0..500 {
            rows.push(LogRow {
                context_i: i,
                context_j: j,
                sample_id: format!("q{k}"),
                alice_correct: u8::from(rng.random_bool(p)),
                bob_correct: u8::from(rng.random_bool(p)),
            });
        }
    }
    OutcomeLog::new(rows)
}

fn main() -> ncnet::Result<()> {
    let log = match std::env::args().nth(1) {
        Some(path) => {
            let format = if path.ends_with(".jsonl") {
                LogFormat::Jsonl
            } else {
                LogFormat::Csv
            };
            parse_log(std::fs::File::open(path)?, format)?
        }
        None => synthetic()?,
    };
    let rep = report(&log, RegimeThresholds::default())?;
    println!("{rep}");
    Ok(())
}
