//! Accuracies, correlations, and S computed from correctness logs produced
//! by any external model.
//!
//! CSV logs carry the header `context_i,context_j,sample_id,alice_correct,bob_correct`;
//! JSONL logs carry one object per line with the same field names. Each
//! context is scored over its own rows, so contexts may differ in size.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::bell::{chsh_s, correlation, outcomes, CorrelationQuad};
use crate::error::{Error, Result};

pub const LOG_CSV_HEADER: [&str; 5] = [
    "context_i",
    "context_j",
    "sample_id",
    "alice_correct",
    "bob_correct",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for LogFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::InvalidConfig(format!(
                "unknown log format {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogRow {
    pub context_i: u8,
    pub context_j: u8,
    pub sample_id: String,
    pub alice_correct: u8,
    pub bob_correct: u8,
}

/// Validated correctness log covering all four contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeLog {
    rows: Vec<LogRow>,
}

fn check_row(row: &LogRow, line: usize) -> Result<()> {
    let bad = |msg: String| Error::Parse { line, msg };
    for (name, v) in [("context_i", row.context_i), ("context_j", row.context_j)] {
        if !(1..=2).contains(&v) {
            return Err(bad(format!("{name} = {v} out of range, expected 1 or 2")));
        }
    }
    for (name, v) in [
        ("alice_correct", row.alice_correct),
        ("bob_correct", row.bob_correct),
    ] {
        if v > 1 {
            return Err(bad(format!("{name} = {v}, expected 0 or 1")));
        }
    }
    Ok(())
}

impl OutcomeLog {
    /// Validates rows; `lines[k]` is the source line of `rows[k]` for
    /// error messages.
    fn from_rows_with_lines(rows: Vec<LogRow>, lines: &[usize]) -> Result<Self> {
        let mut seen = HashSet::new();
        for (row, &line) in rows.iter().zip(lines) {
            check_row(row, line)?;
            if !seen.insert((row.context_i, row.context_j, row.sample_id.as_str())) {
                return Err(Error::Duplicate {
                    i: row.context_i,
                    j: row.context_j,
                    sample_id: row.sample_id.clone(),
                    line,
                });
            }
        }
        let missing: Vec<String> = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .into_iter()
            .filter(|&(i, j)| !rows.iter().any(|r| r.context_i == i && r.context_j == j))
            .map(|(i, j)| format!("({i},{j})"))
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingContexts(missing.join(", ")));
        }
        Ok(Self { rows })
    }

    pub fn new(rows: Vec<LogRow>) -> Result<Self> {
        let lines: Vec<usize> = (1..=rows.len()).collect();
        Self::from_rows_with_lines(rows, &lines)
    }

    pub fn rows(&self) -> &[LogRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn context_rows(&self, i: u8, j: u8) -> impl Iterator<Item = &LogRow> {
        self.rows
            .iter()
            .filter(move |r| r.context_i == i && r.context_j == j)
    }

    pub fn write<W: Write>(&self, out: W, format: LogFormat) -> Result<()> {
        match format {
            LogFormat::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .from_writer(out);
                w.write_record(LOG_CSV_HEADER)?;
                for r in &self.rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            LogFormat::Jsonl => {
                let mut out = out;
                for r in &self.rows {
                    serde_json::to_writer(&mut out, r)?;
                    out.write_all(b"\n")?;
                }
            }
        }
        Ok(())
    }
}

fn bit_field(v: &serde_json::Value, name: &str, line: usize) -> Result<u8> {
    match v {
        serde_json::Value::Number(n) => n
            .as_u64()
            .filter(|&b| b <= u8::MAX as u64)
            .map(|b| b as u8)
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("{name} = {n} is not a bit"),
            }),
        serde_json::Value::Bool(b) => Ok(u8::from(*b)),
        serde_json::Value::String(s) => s.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("{name} = {s:?} is not a bit"),
        }),
        other => Err(Error::Parse {
            line,
            msg: format!("{name} = {other} is not a bit"),
        }),
    }
}

fn parse_jsonl_row(text: &str, line: usize) -> Result<LogRow> {
    let bad = |msg: String| Error::Parse { line, msg };
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| bad("expected a JSON object".into()))?;
    let field = |name: &str| {
        obj.get(name)
            .ok_or_else(|| bad(format!("missing field {name}")))
    };
    let sample_id = match field("sample_id")? {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => {
            return Err(bad(format!(
                "sample_id = {other} must be a string or number"
            )))
        }
    };
    Ok(LogRow {
        context_i: bit_field(field("context_i")?, "context_i", line)?,
        context_j: bit_field(field("context_j")?, "context_j", line)?,
        sample_id,
        alice_correct: bit_field(field("alice_correct")?, "alice_correct", line)?,
        bob_correct: bit_field(field("bob_correct")?, "bob_correct", line)?,
    })
}

pub fn parse_log<R: Read>(input: R, format: LogFormat) -> Result<OutcomeLog> {
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    match format {
        LogFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(input);
            let header = rdr
                .headers()
                .map_err(|e| Error::Parse {
                    line: 1,
                    msg: e.to_string(),
                })?
                .clone();
            if header.iter().ne(LOG_CSV_HEADER.iter().copied()) {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!(
                        "expected header {:?}, got {:?}",
                        LOG_CSV_HEADER.join(","),
                        header
                    ),
                });
            }
            let mut record = csv::StringRecord::new();
            loop {
                let line = rdr.position().line() as usize;
                match rdr.read_record(&mut record) {
                    Ok(false) => break,
                    Ok(true) => {
                        let line = record.position().map_or(line, |p| p.line() as usize);
                        let row: LogRow =
                            record
                                .deserialize(Some(&header))
                                .map_err(|e| Error::Parse {
                                    line,
                                    msg: e.to_string(),
                                })?;
                        rows.push(row);
                        lines.push(line);
                    }
                    Err(e) => {
                        return Err(Error::Parse {
                            line,
                            msg: e.to_string(),
                        })
                    }
                }
            }
        }
        LogFormat::Jsonl => {
            for (k, text) in BufReader::new(input).lines().enumerate() {
                let text = text?;
                if text.trim().is_empty() {
                    continue;
                }
                rows.push(parse_jsonl_row(&text, k + 1)?);
                lines.push(k + 1);
            }
        }
    }
    OutcomeLog::from_rows_with_lines(rows, &lines)
}

/// Cut points between the three S regimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            low: 1.9,
            high: 2.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "S ≪ 2: underfitting")]
    Underfitting,
    #[serde(rename = "S ≈ 2: converged")]
    Converged,
    #[serde(rename = "S ≫ 2: critical regime")]
    Critical,
}

impl Regime {
    pub fn classify(s: f64, t: RegimeThresholds) -> Self {
        if s < t.low {
            Self::Underfitting
        } else if s <= t.high {
            Self::Converged
        } else {
            Self::Critical
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Underfitting => "S ≪ 2: underfitting",
            Self::Converged => "S ≈ 2: converged",
            Self::Critical => "S ≫ 2: critical regime",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextReport {
    /// `A1B1` .. `A2B2`.
    pub task: String,
    pub i: u8,
    pub j: u8,
    pub rows: usize,
    pub acc_alice: f64,
    pub acc_bob: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub contexts: Vec<ContextReport>,
    pub s: f64,
    pub regime: Regime,
    pub thresholds: RegimeThresholds,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl IngestReport {
    pub fn quad(&self) -> CorrelationQuad {
        CorrelationQuad::from_array([0, 1, 2, 3].map(|k| self.contexts[k].c))
    }
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.metadata {
            writeln!(f, "{k}: {v}")?;
        }
        writeln!(
            f,
            "{:<6} {:>8} {:>9} {:>9} {:>8}",
            "Task", "rows", "Acc_A", "Acc_B", "C"
        )?;
        for c in &self.contexts {
            writeln!(
                f,
                "{:<6} {:>8} {:>8.2}% {:>8.2}% {:>8.4}",
                c.task,
                c.rows,
                100.0 * c.acc_alice,
                100.0 * c.acc_bob,
                c.c
            )?;
        }
        write!(f, "S = {:.3}  ({})", self.s, self.regime.label())
    }
}

/// Scores a log. Outcome vectors are `+1` for a correct answer and `-1`
/// otherwise; `C` is their mean product and `S = C11 + C12 + C21 - C22`.
pub fn report(log: &OutcomeLog, thresholds: RegimeThresholds) -> Result<IngestReport> {
    let mut contexts = Vec::with_capacity(4);
    for (i, j) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        let (alice, bob): (Vec<u8>, Vec<u8>) = log
            .context_rows(i, j)
            .map(|r| (r.alice_correct, r.bob_correct))
            .unzip();
        if alice.is_empty() {
            return Err(Error::MissingContexts(format!("({i},{j})")));
        }
        let truth = vec![1u8; alice.len()];
        let a = outcomes(&alice, &truth)?;
        let b = outcomes(&bob, &truth)?;
        let rows = alice.len();
        let frac = |v: &[u8]| v.iter().map(|&x| usize::from(x)).sum::<usize>() as f64 / rows as f64;
        contexts.push(ContextReport {
            task: format!("A{i}B{j}"),
            i,
            j,
            rows,
            acc_alice: frac(&alice),
            acc_bob: frac(&bob),
            c: correlation(&a, &b)?,
        });
    }
    let quad = CorrelationQuad::from_array([0, 1, 2, 3].map(|k| contexts[k].c));
    let s = chsh_s(&quad);
    Ok(IngestReport {
        contexts,
        s,
        regime: Regime::classify(s, thresholds),
        thresholds,
        metadata: BTreeMap::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: u8, j: u8, id: &str, a: u8, b: u8) -> LogRow {
        LogRow {
            context_i: i,
            context_j: j,
            sample_id: id.into(),
            alice_correct: a,
            bob_correct: b,
        }
    }

    const EIGHT_ROWS: &str = "context_i,context_j,sample_id,alice_correct,bob_correct
1,1,s0,1,1
1,1,s1,1,0
1,2,s0,1,1
1,2,s1,0,0
2,1,s0,1,1
2,1,s1,1,1
2,2,s0,0,1
2,2,s1,1,1
";

    #[test]
    fn parses_four_context_csv() {
        let log = parse_log(EIGHT_ROWS.as_bytes(), LogFormat::Csv).unwrap();
        assert_eq!(log.len(), 8);
        let r = report(&log, RegimeThresholds::default()).unwrap();
        let c: Vec<f64> = r.contexts.iter().map(|c| c.c).collect();
        assert_eq!(c, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(r.s, 2.0);
        assert_eq!(r.contexts[0].acc_bob, 0.5);
    }

    #[test]
    fn duplicate_is_named() {
        let text = format!("{EIGHT_ROWS}2,2,s1,0,0\n");
        match parse_log(text.as_bytes(), LogFormat::Csv) {
            Err(Error::Duplicate {
                i: 2,
                j: 2,
                sample_id,
                line,
            }) => {
                assert_eq!(sample_id, "s1");
                assert_eq!(line, 10);
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_context() {
        let text = format!("{EIGHT_ROWS}3,1,s9,1,1\n");
        let err = parse_log(text.as_bytes(), LogFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 10, .. }), "{err}");
        assert!(err.to_string().contains("context_i = 3"));
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = EIGHT_ROWS.replace("2,1,s1,1,1", "2,1,s1,yes,1");
        assert!(matches!(
            parse_log(text.as_bytes(), LogFormat::Csv),
            Err(Error::Parse { line: 7, .. })
        ));
        let text = EIGHT_ROWS.replace("1,2,s1,0,0", "1,2,s1,0");
        assert!(matches!(
            parse_log(text.as_bytes(), LogFormat::Csv),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn missing_contexts_listed() {
        let text: String = EIGHT_ROWS
            .lines()
            .filter(|l| !l.starts_with("2,"))
            .map(|l| format!("{l}\n"))
            .collect();
        match parse_log(text.as_bytes(), LogFormat::Csv) {
            Err(Error::MissingContexts(m)) => assert_eq!(m, "(2,1), (2,2)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_header() {
        let text = EIGHT_ROWS.replacen("sample_id", "id", 1);
        assert!(matches!(
            parse_log(text.as_bytes(), LogFormat::Csv),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn jsonl_matches_csv() {
        let log = parse_log(EIGHT_ROWS.as_bytes(), LogFormat::Csv).unwrap();
        let mut buf = Vec::new();
        log.write(&mut buf, LogFormat::Jsonl).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            r#"{"context_i":1,"context_j":1,"sample_id":"s0","alice_correct":1,"bob_correct":1}"#
        ));
        assert_eq!(parse_log(text.as_bytes(), LogFormat::Jsonl).unwrap(), log);
    }

    #[test]
    fn jsonl_errors_carry_line_numbers() {
        let text = "{\"context_i\":1,\"context_j\":1,\"sample_id\":\"a\",\"alice_correct\":1,\"bob_correct\":1}\n\nnot json\n";
        assert!(matches!(
            parse_log(text.as_bytes(), LogFormat::Jsonl),
            Err(Error::Parse { line: 3, .. })
        ));
        let text = "{\"context_i\":1,\"context_j\":1,\"sample_id\":\"a\",\"alice_correct\":1}\n";
        let err = parse_log(text.as_bytes(), LogFormat::Jsonl).unwrap_err();
        assert!(err.to_string().contains("bob_correct"));
    }

    #[test]
    fn all_correct_gives_two() {
        let rows = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .into_iter()
            .flat_map(|(i, j)| (0..5).map(move |k| row(i, j, &k.to_string(), 1, 1)))
            .collect();
        let r = report(&OutcomeLog::new(rows).unwrap(), RegimeThresholds::default()).unwrap();
        assert!(r
            .contexts
            .iter()
            .all(|c| c.acc_alice == 1.0 && c.acc_bob == 1.0 && c.c == 1.0));
        assert_eq!(r.s, 2.0);
        assert_eq!(r.regime, Regime::Converged);
    }

    #[test]
    fn regime_boundaries() {
        let t = RegimeThresholds::default();
        assert_eq!(Regime::classify(1.8999, t), Regime::Underfitting);
        assert_eq!(Regime::classify(1.9, t), Regime::Converged);
        assert_eq!(Regime::classify(2.1, t), Regime::Converged);
        assert_eq!(Regime::classify(2.1001, t), Regime::Critical);
        let custom = RegimeThresholds {
            low: 1.5,
            high: 2.5,
        };
        assert_eq!(Regime::classify(2.2, custom), Regime::Converged);
    }

    #[test]
    fn report_json_carries_labels() {
        let log = parse_log(EIGHT_ROWS.as_bytes(), LogFormat::Csv).unwrap();
        let json =
            serde_json::to_string(&report(&log, RegimeThresholds::default()).unwrap()).unwrap();
        assert!(json.contains("\"regime\":\"S ≈ 2: converged\""));
        assert!(json.contains("\"task\":\"A2B2\""));
    }
}
