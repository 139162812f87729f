//! Renders an existing sweep CSV as an SVG scatter.
//!
//!     cargo run --example plot_sweep -- sweep-out/sweep.csv fig.svg

use ncnet::contexts::read_sweep_csv;
use ncnet::plot::{points_from_rows, scatter_svg};

fn main() -> ncnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .expect("usage: plot_sweep <sweep.csv> [out.svg]");
    let output = args.next().unwrap_or_else(|| "sweep.svg".into());
    let rows = read_sweep_csv(std::fs::File::open(&input)?)?;
    let svg = scatter_svg(&points_from_rows(&rows), Some(&input))?;
    std::fs::write(&output, svg)?;
    println!("{} points -> {output}", rows.len());
    Ok(())
}
