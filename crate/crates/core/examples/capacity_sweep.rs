//! S against hidden size: the sweep behind the capacity scatter plot.
//! Writes sweep.csv and sweep.svg into the given directory.
//!
//!     cargo run --release --example capacity_sweep -- out/ 50

use std::path::PathBuf;

use ncnet::contexts::{read_sweep_csv, sweep, ExperimentConfig};
use ncnet::plot::{points_from_rows, scatter_svg};

fn main() -> ncnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "sweep-out".into()));
    let repeats: usize = args.next().map_or(20, |a| a.parse().expect("repeat count"));
    std::fs::create_dir_all(&dir)?;

    let cfg = ExperimentConfig {
        repeats,
        hidden_sizes: vec![1, 2, 3, 4, 6, 8],
        ..Default::default()
    };
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let out = sweep(&cfg, workers)?;

    println!(
        "{:>3} {:>8} {:>8} {:>6} {:>7}",
        "n", "mean S", "median", "S>2", "max S"
    );
    for a in &out.aggregates {
        println!(
            "{:>3} {:>8.3} {:>8.3} {:>6.2} {:>7.3}",
            a.n, a.mean_s, a.median_s, a.frac_gt2, a.max_s
        );
    }

    let mut csv = Vec::new();
    out.write_csv(&mut csv)?;
    std::fs::write(dir.join("sweep.csv"), &csv)?;
    let svg = scatter_svg(
        &points_from_rows(&read_sweep_csv(csv.as_slice())?),
        Some("S against hidden size"),
    )?;
    std::fs::write(dir.join("sweep.svg"), svg)?;
    println!("wrote {}", dir.display());
    Ok(())
}
