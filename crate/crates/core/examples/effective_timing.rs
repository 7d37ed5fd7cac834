//! Weights from timing: message rate versus how long each command stays in
//! force.
//!
//! cargo run --example effective_timing

use conflict_lens::{
    effective_weights, inverse_hold_weights, rate_weights, schedule_holds, timing_weights,
    TimingSpec,
};

fn main() -> conflict_lens::Result<()> {
    let paired = [
        TimingSpec::every(1.0).with_hold(0.8),
        TimingSpec::every(1.0).with_hold(0.2),
    ];
    println!("same period, holds 0.8/0.2");
    println!("  rate       {:?}", rate_weights(&[1.0, 1.0])?.weights());
    println!("  effective  {:?}", effective_weights(&paired)?.weights());
    println!(
        "  1/hold     {:?}",
        inverse_hold_weights(&paired)?.weights()
    );

    // An application firing 1 ms after another holds the parameter almost never.
    let eps = [
        TimingSpec::every(1.0),
        TimingSpec::every(1.0).with_offset(0.001),
    ];
    println!("epsilon offset: {:?}", effective_weights(&eps)?.weights());

    let mixed = [
        TimingSpec::every(2.0),
        TimingSpec::every(10.0).with_offset(1.0),
    ];
    println!("ES2-TM10 holds {:?}", schedule_holds(&mixed)?);
    let w = timing_weights(&mixed)?;
    println!("ES2-TM10 {:?} weights {:?}", w.mode(), w.weights());
    Ok(())
}
