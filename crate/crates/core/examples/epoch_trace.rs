//! S tracked over training with all four contexts stepped in lockstep,
//! and the mean slope of S over two windows.
//!
//!     cargo run --release --example epoch_trace -- 3 42

use ncnet::contexts::{epoch_trace, mean_slope};
use ncnet::neuralcore::TrainConfig;

fn main() -> ncnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(3, |a| a.parse().expect("hidden size"));
    let seed: u64 = args.next().map_or(42, |a| a.parse().expect("seed"));

    let trace = epoch_trace(n, seed, &TrainConfig::default(), 20)?;
    for p in trace
        .points()
        .iter()
        .filter(|p| p.epoch % 200 == 0 || p.epoch == 20)
    {
        let total: f64 = p.losses.iter().sum();
        println!(
            "epoch {:>5}  S {:+.4}  summed loss {total:.4}",
            p.epoch, p.s
        );
    }
    for window in [(20, 400), (400, 2000)] {
        let m = mean_slope(&trace, window)?;
        println!(
            "window {:?}: mu_grad_s {:+.3e} over {} points",
            window, m.mu_grad_s, m.points
        );
    }
    Ok(())
}
