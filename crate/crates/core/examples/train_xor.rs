//! Trains one two-head network on a single context and prints its loss
//! curve and per-head accuracy.
//!
//!     cargo run --release --example train_xor -- 3 2 2

use ncnet::neuralcore::{accuracy, init_network, train, ArchConfig, TrainConfig};
use ncnet::tasklab::{enumerate_dataset, ContextPair};

fn main() -> ncnet::Result<()> {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("integer argument"))
        .collect();
    let n = *args.first().unwrap_or(&3) as usize;
    let (i, j) = (
        *args.get(1).unwrap_or(&2) as u8,
        *args.get(2).unwrap_or(&2) as u8,
    );

    let pair = ContextPair::canonical(i, j)?;
    let data = enumerate_dataset(pair);
    let cfg = TrainConfig::default();
    let net = init_network(
        ArchConfig::ncnet(n).with_encoding(cfg.input_encoding),
        cfg.seed,
    )?;
    let out = train(net, &data, &cfg)?;

    println!(
        "context {} ({} / {}), n = {n}",
        pair.tag(),
        pair.alice,
        pair.bob
    );
    for e in [1, 10, 100, 500, 1000, cfg.epochs] {
        let (a, b) = (out.head_loss_trace[0][e - 1], out.head_loss_trace[1][e - 1]);
        println!(
            "epoch {e:>5}  loss {:.5}  (alice {a:.5}, bob {b:.5})",
            out.loss_trace[e - 1]
        );
    }
    let preds = out.network.predict(&out.network.batch(&data))?;
    println!(
        "accuracy: alice {:.4}, bob {:.4}",
        accuracy(&preds, &data.alice_labels(), 0),
        accuracy(&preds, &data.bob_labels(), 1)
    );
    Ok(())
}
