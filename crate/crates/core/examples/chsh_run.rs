//! Four independently trained contexts, their correlations and S.
//!
//!     cargo run --release --example chsh_run -- 3 42

use ncnet::bell::{tsirelson_bound, CLASSICAL_BOUND};
use ncnet::contexts::run_contexts_detailed;
use ncnet::neuralcore::TrainConfig;

fn main() -> ncnet::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(3, |a| a.parse().expect("hidden size"));
    let seed: u64 = args.next().map_or(42, |a| a.parse().expect("seed"));

    let run = run_contexts_detailed(n, seed, &TrainConfig::default())?;
    let r = &run.result;
    println!("n = {n}, master seed {seed}, config {}", r.meta.config_hash);
    println!(
        "{:<6} {:>8} {:>8} {:>8} {:>10}",
        "ctx", "acc A", "acc B", "C", "loss"
    );
    for ((acc, c), loss) in r
        .accuracies
        .iter()
        .zip(r.quad.to_array())
        .zip(run.final_losses)
    {
        println!(
            "A{}B{}   {:>8.4} {:>8.4} {:>8.4} {:>10.2e}",
            acc.i, acc.j, acc.alice, acc.bob, c, loss
        );
    }
    println!(
        "S = {:.4}  (classical bound {CLASSICAL_BOUND}, Tsirelson {:.4})",
        r.s,
        tsirelson_bound()
    );
    Ok(())
}
