//! The `ncnet` command line.
//!
//! Settings resolve as defaults < `--config` TOML file < flags. The worker
//! count default comes from `NCNET_WORKERS` when set, else the number of
//! available cores. Exit codes: 0 success, 1 runtime or data error, 2 usage
//! error.
//!
//! Config file keys (all optional):
//!
//! ```toml
//! epochs = 2000
//! lr = 0.05
//! optimizer = "adam"      # or "sgd"
//! encoding = "signed"     # or "binary"
//! seed = 42
//! workers = 4
//! repeats = 50
//! ns = [2, 3, 4]
//! trace_every = 0
//! stride = 10
//! low = 1.9
//! high = 2.1
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::bell::lhv_enumerate;
use crate::contexts::{
    epoch_trace, mean_slope, read_sweep_csv, run_contexts, sweep, ExperimentConfig,
};
use crate::error::{Error, Result};
use crate::ingest::{parse_log, report, LogFormat, RegimeThresholds};
use crate::manifest::{sha256_hex, RunManifest};
use crate::neuralcore::{OptimizerKind, TrainConfig};
use crate::plot::{points_from_rows, scatter_svg};
use crate::tasklab::InputEncoding;

pub const WORKERS_ENV: &str = "NCNET_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "ncnet",
    version,
    about = "CHSH statistics of two-head networks trained in four task contexts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the four context networks once and print the result as JSON.
    Run(RunArgs),
    /// Repeat the four-context run over hidden sizes and seeds.
    Sweep(SweepArgs),
    /// Enumerate deterministic local strategies and print the classical bound.
    Lhv(LhvArgs),
    /// Record S during lockstep training and summarize its slope.
    Trace(TraceArgs),
    /// Score an external correctness log.
    Ingest(IngestArgs),
    /// Draw a sweep CSV as an SVG scatter of S against n.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct TrainFlags {
    /// Training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// `adam` or `sgd`.
    #[arg(long, value_parser = parse_optimizer)]
    pub optimizer: Option<OptimizerKind>,
    /// Input encoding, `signed` (±1) or `binary` (0/1).
    #[arg(long, value_parser = parse_encoding)]
    pub encoding: Option<InputEncoding>,
    /// TOML file with default settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Hidden layer size.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated hidden sizes.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    pub ns: Option<Vec<u64>>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Also trace S every this many epochs and report its maximum.
    #[arg(long)]
    pub trace_every: Option<usize>,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct LhvArgs {
    /// Write the full 16-row table here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: Option<u64>,
    /// Epoch window `start,end` for the slope summary.
    #[arg(long, value_parser = parse_window)]
    pub window: (usize, usize),
    /// Trace CSV path.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// `csv` or `jsonl`.
    #[arg(long, value_parser = parse_format, default_value = "csv")]
    pub format: LogFormat,
    /// Lower regime threshold.
    #[arg(long)]
    pub low: Option<f64>,
    /// Upper regime threshold.
    #[arg(long)]
    pub high: Option<f64>,
    /// `key=value` metadata copied into the report (e.g. `rank=8`).
    #[arg(long, value_parser = parse_meta)]
    pub meta: Vec<(String, String)>,
    /// Print a text table instead of JSON.
    #[arg(long)]
    pub table: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub sweep: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_optimizer(s: &str) -> std::result::Result<OptimizerKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_encoding(s: &str) -> std::result::Result<InputEncoding, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<LogFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_window(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected start,end")?;
    let a: usize = a.trim().parse().map_err(|e| format!("window start: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("window end: {e}"))?;
    if a >= b {
        return Err(format!("window start {a} must be below end {b}"));
    }
    Ok((a, b))
}

fn parse_meta(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or("expected key=value")?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub encoding: Option<InputEncoding>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub repeats: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub trace_every: Option<usize>,
    pub stride: Option<usize>,
    pub low: Option<f64>,
    pub high: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

fn resolve_train(flags: &TrainFlags, file: &FileConfig) -> TrainConfig {
    let d = TrainConfig::default();
    TrainConfig {
        optimizer: flags.optimizer.or(file.optimizer).unwrap_or(d.optimizer),
        learning_rate: flags.lr.or(file.lr).unwrap_or(d.learning_rate),
        epochs: flags.epochs.or(file.epochs).unwrap_or(d.epochs),
        input_encoding: flags.encoding.or(file.encoding).unwrap_or(d.input_encoding),
        ..d
    }
}

/// Worker count when neither flag nor config file sets one.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w: &usize| w >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Run(a) => cmd_run(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Lhv(a) => cmd_lhv(a, out),
        Command::Trace(a) => cmd_trace(a, out),
        Command::Ingest(a) => cmd_ingest(a, out),
        Command::Plot(a) => cmd_plot(a, out),
    }
}

pub fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(a.train.config.as_deref())?;
    let cfg = resolve_train(&a.train, &file);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let result = run_contexts(a.n as usize, seed, &cfg)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&result)?)?;
    Ok(())
}

pub fn cmd_sweep(a: SweepArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(a.train.config.as_deref())?;
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        train: resolve_train(&a.train, &file),
        master_seed: a.seed.or(file.seed).unwrap_or(defaults.master_seed),
        repeats: a
            .repeats
            .map(|r| r as usize)
            .or(file.repeats)
            .unwrap_or(defaults.repeats),
        hidden_sizes: a
            .ns
            .map(|ns| ns.into_iter().map(|n| n as usize).collect())
            .or(file.ns)
            .unwrap_or(defaults.hidden_sizes),
        trace_every: a.trace_every.or(file.trace_every).unwrap_or(0),
    };
    let workers = a
        .workers
        .map(|w| w as usize)
        .or(file.workers)
        .unwrap_or_else(default_workers);
    cfg.validate()?;
    std::fs::create_dir_all(&a.out)?;

    let result = sweep(&cfg, workers)?;
    let mut manifest =
        RunManifest::new("sweep", Some(cfg.master_seed), serde_json::to_value(&cfg)?);
    manifest.config["workers"] = workers.into();

    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    manifest.write_output(&a.out.join("sweep.csv"), &csv)?;
    let agg = serde_json::to_string_pretty(&result.aggregate_json(Some(&manifest.hash)))? + "\n";
    manifest.write_output(&a.out.join("aggregate.json"), agg.as_bytes())?;
    manifest.save(&a.out.join("manifest.json"))?;

    writeln!(
        out,
        "{:>4} {:>5} {:>8} {:>8} {:>7} {:>7}  mean C (11, 12, 21, 22)",
        "n", "runs", "mean S", "median", "S>2", "max S"
    )?;
    for g in &result.aggregates {
        let q = g.mean_quad;
        writeln!(
            out,
            "{:>4} {:>5} {:>8.4} {:>8.4} {:>6.1}% {:>7.4}  ({:.3}, {:.3}, {:.3}, {:.3})",
            g.n,
            g.runs,
            g.mean_s,
            g.median_s,
            100.0 * g.frac_gt2,
            g.max_s,
            q.c11,
            q.c12,
            q.c21,
            q.c22
        )?;
    }
    let failed = result.records.iter().filter(|r| r.outcome.is_err()).count();
    if failed > 0 {
        writeln!(out, "{failed} trial(s) failed; see the status column")?;
    }
    writeln!(
        out,
        "wrote {} (manifest {})",
        a.out.display(),
        &manifest.hash[..12]
    )?;
    Ok(())
}

pub fn cmd_lhv(a: LhvArgs, out: &mut dyn Write) -> Result<()> {
    let table = lhv_enumerate();
    writeln!(out, "max S = {}", table.max_s)?;
    writeln!(out, "maximizing strategies ({}):", table.argmax.len())?;
    for st in &table.argmax {
        writeln!(
            out,
            "  a1={:+} a2={:+} b1={:+} b2={:+}  S={}",
            st.a1,
            st.a2,
            st.b1,
            st.b2,
            st.s()
        )?;
    }
    writeln!(out, "{}", table.note)?;
    if let Some(path) = a.csv {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        std::fs::write(path, buf)?;
    }
    Ok(())
}

pub fn cmd_trace(a: TraceArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(a.train.config.as_deref())?;
    let cfg = resolve_train(&a.train, &file);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let stride = a.stride.map(|s| s as usize).or(file.stride).unwrap_or(1);
    let trace = epoch_trace(a.n as usize, seed, &cfg, stride)?;
    let slope = mean_slope(&trace, a.window)?;

    let mut manifest = RunManifest::new(
        "trace",
        Some(seed),
        serde_json::json!({ "n": a.n, "stride": stride, "window": a.window, "train": cfg }),
    );
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    manifest.write_output(&a.out, &csv)?;
    manifest.save(&a.out.with_extension("manifest.json"))?;

    writeln!(out, "mu_grad_s = {}", slope.mu_grad_s)?;
    writeln!(out, "telescoped = {}", slope.telescoped)?;
    writeln!(
        out,
        "window = {},{} ({} points)",
        slope.window.0, slope.window.1, slope.points
    )?;
    writeln!(out, "final S = {}", trace.final_s().unwrap_or(f64::NAN))?;
    writeln!(out, "max S = {}", trace.max_s().unwrap_or(f64::NAN))?;
    Ok(())
}

pub fn cmd_ingest(a: IngestArgs, out: &mut dyn Write) -> Result<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let d = RegimeThresholds::default();
    let thresholds = RegimeThresholds {
        low: a.low.or(file.low).unwrap_or(d.low),
        high: a.high.or(file.high).unwrap_or(d.high),
    };
    if thresholds.low > thresholds.high {
        return Err(Error::InvalidConfig(format!(
            "low threshold {} above high {}",
            thresholds.low, thresholds.high
        )));
    }
    let log = parse_log(std::fs::File::open(&a.input)?, a.format)?;
    let mut rep = report(&log, thresholds)?;
    rep.metadata.extend(a.meta);
    if a.table {
        writeln!(out, "{rep}")?;
    } else {
        writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    }
    Ok(())
}

pub fn cmd_plot(a: PlotArgs, out: &mut dyn Write) -> Result<()> {
    let bytes = std::fs::read(&a.sweep)?;
    let rows = read_sweep_csv(bytes.as_slice())?;
    let points = points_from_rows(&rows);
    let caption = format!("source {} sha256 {}", a.sweep.display(), sha256_hex(&bytes));
    let svg = scatter_svg(&points, Some(&caption))?;
    std::fs::write(&a.out, svg)?;
    writeln!(out, "wrote {} ({} points)", a.out.display(), points.len())?;
    Ok(())
}
