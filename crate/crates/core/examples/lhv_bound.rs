//! Enumerates the 16 deterministic local strategies and checks random
//! mixtures of them against the classical bound.

use ncnet::bell::{chsh_s, lhv_enumerate, mixture_quad};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ncnet::Result<()> {
    let table = lhv_enumerate();
    for (st, s) in &table.rows {
        println!(
            "a1={:+} a2={:+} b1={:+} b2={:+}  S={s:+}",
            st.a1, st.a2, st.b1, st.b2
        );
    }
    println!(
        "max S = {} ({} strategies)",
        table.max_s,
        table.argmax.len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let w: Vec<f64> = (0..16).map(|_| rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let w: Vec<f64> = w.into_iter().map(|x| x / total).collect();
        worst = worst.max(chsh_s(&mixture_quad(&w)?).abs());
    }
    println!("largest |S| over 10000 random mixtures: {worst:.6}");
    Ok(())
}
