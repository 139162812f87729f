//! How often the two heads pull shared hidden units in opposite
//! directions, and how much each head's loss oscillates, by hidden size.

use ncnet::contexts::{conflict_trace, derive_seed, loss_oscillation};
use ncnet::neuralcore::TrainConfig;
use ncnet::tasklab::ContextPair;

fn main() -> ncnet::Result<()> {
    let cfg = TrainConfig::default();
    let pair = ContextPair::canonical(2, 2)?;
    println!("context {}, 10 seeds, epochs 100..2000", pair.tag());
    println!(
        "{:>3} {:>10} {:>12} {:>12}",
        "n", "conflict", "osc alice", "osc bob"
    );
    for n in [2, 3, 4, 8] {
        let (mut conflict, mut osc_a, mut osc_b) = (0.0, 0.0, 0.0);
        for r in 0..10 {
            let t = conflict_trace(n, derive_seed(42, r), &cfg, pair)?;
            conflict += t.mean_conflict(100, 2000)? / 10.0;
            osc_a += loss_oscillation(&t.alice_losses(), 100)? / 10.0;
            osc_b += loss_oscillation(&t.bob_losses(), 100)? / 10.0;
        }
        println!("{n:>3} {conflict:>10.3} {osc_a:>12.3e} {osc_b:>12.3e}");
    }
    Ok(())
}
