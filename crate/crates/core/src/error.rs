use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid task: {0}")]
    InvalidTask(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),

    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("context ({i},{j}): {source}")]
    Context {
        i: u8,
        j: u8,
        #[source]
        source: Box<Error>,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate outcome vector (zero variance)")]
    DegenerateOutcome,

    #[error("window {start}..={end} contains {points} trace point(s); need at least 2")]
    Window {
        start: usize,
        end: usize,
        points: usize,
    },

    #[error("trace too short: {len} entries with warmup {warmup}")]
    TraceTooShort { len: usize, warmup: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("duplicate row for context ({i},{j}), sample {sample_id:?} at line {line}")]
    Duplicate {
        i: u8,
        j: u8,
        sample_id: String,
        line: usize,
    },

    #[error("missing context(s): {0}")]
    MissingContexts(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
