//! Mixes two distributions with rate weights and compares against a
//! resampled mixture.
//!
//! cargo run --release --example weighted_prediction

use conflict_lens::{build_ecdf, ks_distance, rate_weights, weighted_ecdf_average, StepCdf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> conflict_lens::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fast: Vec<f64> = (0..2000)
        .map(|_| f64::from(rng.random_range(1..5u32) * 3))
        .collect();
    let slow: Vec<f64> = (0..2000)
        .map(|_| f64::from(rng.random_range(10..17u32) * 3))
        .collect();
    let ecdfs = [build_ecdf(&fast)?, build_ecdf(&slow)?];

    for periods in [[1.0, 1.0], [2.0, 10.0], [10.0, 2.0]] {
        let w = rate_weights(&periods)?;
        let pred = weighted_ecdf_average(&ecdfs, &w)?;
        let draws: Vec<f64> = (0..200_000)
            .map(|_| {
                let src = if rng.random_bool(w.weights()[0]) {
                    &fast
                } else {
                    &slow
                };
                src[rng.random_range(0..src.len())]
            })
            .collect();
        let ks = ks_distance(&pred, &build_ecdf(&draws)?);
        println!(
            "periods {periods:?}: weights [{:.4}, {:.4}], P(x <= 12) = {:.4}, ks vs resample = {ks:.4}",
            w.weights()[0],
            w.weights()[1],
            pred.evaluate(12.0)
        );
    }
    Ok(())
}
