#![allow(dead_code)]

use ncnet::ingest::{LogRow, OutcomeLog};

/// Reference correlation quadruples, keyed by (dataset, rank).
pub const MIXED_R1: [f64; 4] = [0.9899, 0.5144, 0.6197, 0.2219];
pub const MIXED_R2: [f64; 4] = [0.9976, 0.8670, 0.9299, 0.6038];
pub const MIXED_R8: [f64; 4] = [0.9995, 0.9887, 0.9971, 0.9839];
pub const MULTILINGUAL_R1: [f64; 4] = [0.7501, 0.7192, 0.7202, 0.6871];

/// Log whose per-context correlation is exactly `c` (given to 4 dp).
///
/// `rows` must be a multiple of 20000 so that `rows * (1 + c) / 2` is an
/// integer. Agreements are split between both-right and both-wrong, and
/// disagreements between the two heads, so the accuracies are not trivial.
pub fn log_with_correlations(c: [f64; 4], rows: usize) -> OutcomeLog {
    assert_eq!(rows % 20000, 0);
    let mut out = Vec::with_capacity(4 * rows);
    for (k, (i, j)) in [(1u8, 1u8), (1, 2), (2, 1), (2, 2)].into_iter().enumerate() {
        let agree = (rows as f64 * (1.0 + c[k]) / 2.0).round() as usize;
        let both_wrong = (rows - agree).min(agree) / 3;
        for id in 0..rows {
            let (a, b) = if id < agree - both_wrong {
                (1, 1)
            } else if id < agree {
                (0, 0)
            } else if (id - agree).is_multiple_of(2) {
                (1, 0)
            } else {
                (0, 1)
            };
            out.push(LogRow {
                context_i: i,
                context_j: j,
                sample_id: format!("s{id}"),
                alice_correct: a,
                bob_correct: b,
            });
        }
    }
    OutcomeLog::new(out).unwrap()
}
