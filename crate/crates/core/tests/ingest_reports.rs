mod common;

use common::*;
use ncnet::bell::{chsh_s, CorrelationQuad};
use ncnet::ingest::{parse_log, report, LogFormat, LogRow, OutcomeLog, Regime, RegimeThresholds};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn mixed_rank1_log_reproduces_reference_row() {
    let rep = report(
        &log_with_correlations(MIXED_R1, 20000),
        RegimeThresholds::default(),
    )
    .unwrap();
    for (ctx, c) in rep.contexts.iter().zip(MIXED_R1) {
        assert!(close(ctx.c, c, 1e-12), "{} {}", ctx.task, ctx.c);
        assert_eq!(ctx.rows, 20000);
    }
    assert!(close(rep.s, 1.9021, 1e-12));
    assert!(close(rep.s, 1.902, 5e-4));
    assert_eq!(rep.regime, Regime::Converged);
}

#[test]
fn mixed_rank8_log_reproduces_reference_row() {
    let rep = report(
        &log_with_correlations(MIXED_R8, 20000),
        RegimeThresholds::default(),
    )
    .unwrap();
    assert!(close(rep.s, 2.0014, 1e-12));
    assert!(close(rep.s, 2.001, 5e-4));
    assert_eq!(rep.regime, Regime::Converged);
}

#[test]
fn rank2_row_is_critical() {
    let rep = report(
        &log_with_correlations(MIXED_R2, 20000),
        RegimeThresholds::default(),
    )
    .unwrap();
    assert!(close(rep.s, 2.1907, 1e-12));
    assert_eq!(rep.regime, Regime::Critical);
}

#[test]
fn all_correct_log_gives_two() {
    let rows = (1..=2u8)
        .flat_map(|i| (1..=2u8).map(move |j| (i, j)))
        .flat_map(|(i, j)| {
            (0..10).map(move |k| LogRow {
                context_i: i,
                context_j: j,
                sample_id: k.to_string(),
                alice_correct: 1,
                bob_correct: 1,
            })
        })
        .collect();
    let rep = report(&OutcomeLog::new(rows).unwrap(), RegimeThresholds::default()).unwrap();
    assert_eq!(rep.s, 2.0);
    assert!(rep
        .contexts
        .iter()
        .all(|c| c.acc_alice == 1.0 && c.acc_bob == 1.0));
}

#[test]
fn report_matches_chsh_of_its_quad() {
    let rep = report(
        &log_with_correlations(MULTILINGUAL_R1, 20000),
        RegimeThresholds::default(),
    )
    .unwrap();
    assert_eq!(rep.s, chsh_s(&rep.quad()));
    assert!(close(
        rep.s,
        chsh_s(&CorrelationQuad::from_array(MULTILINGUAL_R1)),
        1e-12
    ));
    assert_eq!(rep.regime, Regime::Underfitting);
}

fn arb_log() -> impl Strategy<Value = OutcomeLog> {
    prop::collection::vec(prop::collection::vec((0u8..=1, 0u8..=1), 1..30), 4).prop_map(|ctxs| {
        let mut rows = Vec::new();
        for ((i, j), samples) in [(1u8, 1u8), (1, 2), (2, 1), (2, 2)].into_iter().zip(ctxs) {
            for (k, (a, b)) in samples.into_iter().enumerate() {
                rows.push(LogRow {
                    context_i: i,
                    context_j: j,
                    sample_id: format!("x{k}"),
                    alice_correct: a,
                    bob_correct: b,
                });
            }
        }
        OutcomeLog::new(rows).unwrap()
    })
}

proptest! {
    #[test]
    fn logs_round_trip(log in arb_log()) {
        for format in [LogFormat::Csv, LogFormat::Jsonl] {
            let mut buf = Vec::new();
            log.write(&mut buf, format).unwrap();
            let back = parse_log(buf.as_slice(), format).unwrap();
            prop_assert_eq!(&back, &log);
            let (a, b) = (report(&log, RegimeThresholds::default()).unwrap(), report(&back, RegimeThresholds::default()).unwrap());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn report_s_within_algebraic_range(log in arb_log()) {
        let rep = report(&log, RegimeThresholds::default()).unwrap();
        prop_assert!(rep.s.abs() <= 4.0);
        for c in &rep.contexts {
            // C = 1 - 2 * P(exactly one head correct)
            prop_assert!(close(c.c, 1.0 - 2.0 * (c.acc_alice + c.acc_bob - 2.0 * both(&log, c.i, c.j)), 1e-12));
        }
    }
}

fn both(log: &OutcomeLog, i: u8, j: u8) -> f64 {
    let rows: Vec<_> = log.context_rows(i, j).collect();
    rows.iter()
        .filter(|r| r.alice_correct == 1 && r.bob_correct == 1)
        .count() as f64
        / rows.len() as f64
}
