use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::tasklab::{enumerate_dataset, BitSample, ContextPair, InputEncoding, LabeledDataset};

fn binary(n: usize) -> ArchConfig {
    ArchConfig::ncnet(n).with_encoding(InputEncoding::Binary)
}

fn random_net(n: usize, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    let mut net = init_network(ArchConfig::ncnet(n), seed).unwrap();
    for p in net.params_mut() {
        *p = rng.random_range(-1.5..1.5);
    }
    net
}

/// Straight-line loss, independent of `head_losses`.
#[allow(clippy::needless_range_loop)]
fn oracle_loss(net: &Network, d: &LabeledDataset) -> f64 {
    let n = net.arch.hidden_size;
    let mut total = 0.0;
    for row in &d.rows {
        let x = row.sample.encode(net.arch.input_encoding);
        let mut h = vec![0.0; n];
        for (u, hu) in h.iter_mut().enumerate() {
            let mut z = net.b1[u];
            for i in 0..4 {
                z += net.w1[u * 4 + i] * x[i];
            }
            *hu = if z > 0.0 { z } else { 0.0 };
        }
        for (k, y) in [row.alice_label, row.bob_label].into_iter().enumerate() {
            let mut z = net.b2[k];
            for u in 0..n {
                z += net.w2[k * n + u] * h[u];
            }
            let p = (1.0 / (1.0 + (-z).exp())).clamp(1e-7, 1.0 - 1e-7);
            let y = f64::from(y);
            total -= (y * p.ln() + (1.0 - y) * (1.0 - p).ln()) / d.rows.len() as f64;
        }
    }
    total
}

fn finite_difference(net: &Network, d: &LabeledDataset, h: f64) -> Vec<f64> {
    let count = net.params().count();
    (0..count)
        .map(|k| {
            let mut plus = net.clone();
            let mut minus = net.clone();
            *plus.params_mut().nth(k).unwrap() += h;
            *minus.params_mut().nth(k).unwrap() -= h;
            (oracle_loss(&plus, d) - oracle_loss(&minus, d)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn init_is_deterministic_and_seed_sensitive() {
    let arch = ArchConfig::ncnet(3);
    let a = init_network(arch, 11).unwrap();
    let b = init_network(arch, 11).unwrap();
    let c = init_network(arch, 12).unwrap();
    assert!(a.bitwise_eq(&b));
    assert!(!a.bitwise_eq(&c));
    assert_eq!(a.w1.len(), 12);
    assert_eq!(a.w2.len(), 6);
    assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0));
}

#[test]
fn init_respects_glorot_limits() {
    let net = init_network(ArchConfig::ncnet(5), 3).unwrap();
    let l1 = (6.0f64 / 9.0).sqrt();
    let l2 = (6.0f64 / 7.0).sqrt();
    assert!(net.w1.iter().all(|w| w.abs() <= l1));
    assert!(net.w2.iter().all(|w| w.abs() <= l2));
}

#[test]
fn zero_arch_rejected() {
    assert!(init_network(ArchConfig::ncnet(0), 0).is_err());
}

#[test]
fn signed_encoding_feeds_minus_one() {
    let mut net = init_network(ArchConfig::ncnet(1), 0).unwrap();
    net.w1 = vec![-1.0, 0.0, 0.0, 0.0];
    let (_, _, h) = net.forward(BitSample::new(0, 0, 0, 0).unwrap()).unwrap();
    assert_eq!(h, vec![1.0]);
}

#[test]
fn forward_zero_weights_gives_half() {
    let mut net = init_network(ArchConfig::ncnet(2), 0).unwrap();
    net.params_mut().for_each(|p| *p = 0.0);
    for k in 0..16 {
        let (a, b, _) = net.forward(BitSample::from_index(k)).unwrap();
        assert_eq!((a, b), (0.5, 0.5));
    }
}

#[test]
fn forward_relu_clamps() {
    let mut net = init_network(binary(2), 0).unwrap();
    net.w1[..4].copy_from_slice(&[1.0, 0.0, 0.0, 0.0]);
    net.b1[0] = -2.0;
    let (_, _, hidden) = net.forward(BitSample::new(1, 1, 0, 1).unwrap()).unwrap();
    assert_eq!(hidden[0], 0.0);
}

#[test]
fn forward_hand_built_xor() {
    // h1 = relu(x1 + x2), h2 = relu(x1 + x2 - 1); out = 10 * (h1 - 2 h2) - 5.
    let mut net = init_network(binary(2), 0).unwrap();
    net.w1 = vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
    net.b1 = vec![0.0, -1.0];
    net.w2 = vec![10.0, -20.0, 0.0, 0.0];
    net.b2 = vec![-5.0, 0.0];
    for (x1, x2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let (p, _, _) = net.forward(BitSample::new(x1, x2, 0, 0).unwrap()).unwrap();
        let xor = x1 ^ x2;
        assert_eq!(u8::from(p > 0.5), xor, "x = ({x1},{x2}), p = {p}");
    }
}

#[test]
fn forward_overflow_is_an_error() {
    let mut net = init_network(binary(2), 0).unwrap();
    net.w2[0] = f64::INFINITY;
    net.w1 = vec![1.0; 8];
    assert!(matches!(
        net.forward(BitSample::from_index(15)),
        Err(crate::Error::NumericalOverflow(_))
    ));
}

#[test]
fn loss_closed_forms() {
    let d = enumerate_dataset(ContextPair::canonical(2, 2).unwrap());
    let mut net = init_network(ArchConfig::ncnet(2), 0).unwrap();
    net.params_mut().for_each(|p| *p = 0.0);
    let l = loss(&net, &d).unwrap();
    assert!((l - 2.0 * std::f64::consts::LN_2).abs() < 1e-12);
    assert!((l - 1.3863).abs() < 1e-4);
}

#[test]
fn loss_of_saturated_correct_net_is_near_zero() {
    // Alice = x1, Bob = x3, both read through huge weights.
    let d = enumerate_dataset(ContextPair::canonical(1, 1).unwrap());
    let mut net = init_network(binary(2), 0).unwrap();
    net.w1 = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
    net.b1 = vec![0.0, 0.0];
    net.w2 = vec![100.0, 0.0, 0.0, 100.0];
    net.b2 = vec![-50.0, -50.0];
    let l = loss(&net, &d).unwrap();
    assert!(l < 1e-6, "loss {l}");
    let g = backward(&net, &d).unwrap();
    assert!(g.norm() < 1e-5, "grad norm {}", g.norm());
}

#[test]
fn loss_matches_straight_line_oracle() {
    for seed in 0..10 {
        let net = random_net(2 + (seed as usize % 4), seed);
        for pair in ContextPair::all() {
            let d = enumerate_dataset(pair);
            let a = loss(&net, &d).unwrap();
            assert!((a - oracle_loss(&net, &d)).abs() < 1e-12);
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let pairs = ContextPair::all();
    for seed in 0..10u64 {
        let n = [2, 3, 5][seed as usize % 3];
        let mut net = random_net(n, seed);
        if seed % 2 == 1 {
            net.arch = net.arch.with_encoding(InputEncoding::Binary);
        }
        let d = enumerate_dataset(pairs[seed as usize % 4]);
        let g = backward(&net, &d).unwrap();
        let fd = finite_difference(&net, &d, 1e-5);
        for (k, (a, f)) in g.flat().zip(&fd).enumerate() {
            let rel = (a - f).abs() / f.abs().max(1.0);
            assert!(rel < 1e-4, "seed {seed} param {k}: analytic {a} vs fd {f}");
        }
    }
}

#[test]
fn per_head_decomposition_sums_to_total() {
    for seed in 0..5 {
        let net = random_net(4, seed);
        let d = enumerate_dataset(ContextPair::canonical(2, 1).unwrap());
        let g = backward(&net, &d).unwrap();
        for k in 0..g.dw1.len() {
            assert!((g.dw1_alice()[k] + g.dw1_bob()[k] - g.dw1[k]).abs() < 1e-12);
        }
        for k in 0..g.db1.len() {
            assert!((g.db1_alice()[k] + g.db1_bob()[k] - g.db1[k]).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_learning_rate_is_a_no_op() {
    let d = enumerate_dataset(ContextPair::canonical(2, 2).unwrap());
    for optimizer in [OptimizerKind::Sgd, OptimizerKind::Adam] {
        let net = random_net(3, 9);
        let cfg = TrainConfig {
            optimizer,
            learning_rate: 0.0,
            epochs: 25,
            ..Default::default()
        };
        let out = train(net.clone(), &d, &cfg).unwrap();
        assert!(out.network.bitwise_eq(&net));
        assert_eq!(out.loss_trace.len(), 25);
    }
}

#[test]
fn training_is_deterministic() {
    let d = enumerate_dataset(ContextPair::canonical(1, 2).unwrap());
    let cfg = TrainConfig {
        epochs: 300,
        ..Default::default()
    };
    let run = || train(init_network(ArchConfig::ncnet(3), 77).unwrap(), &d, &cfg).unwrap();
    let (a, b) = (run(), run());
    assert!(a.network.bitwise_eq(&b.network));
    assert!(a
        .loss_trace
        .iter()
        .zip(&b.loss_trace)
        .all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn invalid_train_config_rejected() {
    let d = enumerate_dataset(ContextPair::canonical(1, 1).unwrap());
    let net = init_network(ArchConfig::ncnet(2), 0).unwrap();
    for cfg in [
        TrainConfig {
            learning_rate: -0.1,
            ..Default::default()
        },
        TrainConfig {
            learning_rate: f64::NAN,
            ..Default::default()
        },
        TrainConfig {
            epochs: 0,
            ..Default::default()
        },
    ] {
        assert!(train(net.clone(), &d, &cfg).is_err());
    }
}

#[test]
fn overflowing_weights_abort_training() {
    let d = enumerate_dataset(ContextPair::canonical(1, 1).unwrap());
    let mut net = random_net(3, 1);
    net.w1.iter_mut().for_each(|w| *w = 1e300);
    net.w2.iter_mut().for_each(|w| *w = 1e300);
    let cfg = TrainConfig {
        optimizer: OptimizerKind::Sgd,
        learning_rate: 0.1,
        epochs: 10,
        ..Default::default()
    };
    assert!(matches!(
        train(net, &d, &cfg),
        Err(crate::Error::NumericalOverflow(_))
    ));
}

#[test]
fn divergence_reports_epoch() {
    // A huge SGD step pushes W2 to infinity after the first update.
    let d = enumerate_dataset(ContextPair::canonical(2, 2).unwrap());
    let net = random_net(3, 2);
    let cfg = TrainConfig {
        optimizer: OptimizerKind::Sgd,
        learning_rate: f64::MAX,
        epochs: 10,
        ..Default::default()
    };
    match train(net, &d, &cfg) {
        Err(crate::Error::Diverged { epoch, .. }) => assert_eq!(epoch, 1),
        Err(crate::Error::NumericalOverflow(_)) => {}
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn sgd_step_follows_gradient() {
    let d = enumerate_dataset(ContextPair::canonical(2, 2).unwrap());
    let net = random_net(3, 4);
    let g = backward(&net, &d).unwrap();
    let cfg = TrainConfig {
        optimizer: OptimizerKind::Sgd,
        learning_rate: 0.1,
        epochs: 1,
        ..Default::default()
    };
    let out = train(net.clone(), &d, &cfg).unwrap();
    for ((w0, w1), gk) in net.params().zip(out.network.params()).zip(g.flat()) {
        assert_eq!(*w1, w0 - 0.1 * gk);
    }
}

#[test]
fn first_adam_step_moves_each_weight_by_lr() {
    // After bias correction the first Adam step is lr * g / (|g| + eps).
    let d = enumerate_dataset(ContextPair::canonical(1, 1).unwrap());
    let net = random_net(3, 5);
    let g = backward(&net, &d).unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.05,
        epochs: 1,
        ..Default::default()
    };
    let out = train(net.clone(), &d, &cfg).unwrap();
    for ((w0, w1), gk) in net.params().zip(out.network.params()).zip(g.flat()) {
        let expected = 0.05 * gk / (gk.abs() + ADAM_EPS);
        assert!(((w0 - w1) - expected).abs() < 1e-12);
    }
}

#[test]
fn json_round_trip_is_exact() {
    let net = random_net(3, 21);
    let text = net.to_json().unwrap();
    assert!(text.contains("\"version\": 1"));
    let back = Network::from_json(&text).unwrap();
    assert!(back.bitwise_eq(&net));
    assert_eq!(back.seed, net.seed);
}

#[test]
fn json_rejects_bad_shapes() {
    let net = random_net(3, 21);
    let mut v: serde_json::Value = serde_json::from_str(&net.to_json().unwrap()).unwrap();
    v["b1"].as_array_mut().unwrap().pop();
    assert!(Network::from_json(&v.to_string()).is_err());
}
