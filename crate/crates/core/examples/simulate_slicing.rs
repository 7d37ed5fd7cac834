//! Runs the slicing simulator with one energy saver and writes the trace.
//!
//! cargo run --release --example simulate_slicing [out_dir]

use conflict_lens::sim::{run_single, trace_to_profile, AgentSpec, ScenarioConfig};

fn main() -> conflict_lens::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("conflict-lens-sim"));
    let cfg = ScenarioConfig {
        duration: 120.0,
        ..ScenarioConfig::default()
    };
    let trace = run_single(&cfg, &AgentSpec::energy_saver("es", 1.0))?;

    for (s, slice) in cfg.slices.iter().enumerate() {
        let recs: Vec<_> = trace.records.iter().filter(|r| r.slice == s).collect();
        let n = recs.len() as f64;
        let prbs = recs.iter().map(|r| f64::from(r.prbs)).sum::<f64>() / n;
        let thr = recs.iter().map(|r| r.throughput_mbps).sum::<f64>() / n;
        let last = recs.last().unwrap();
        println!(
            "{}: demand {} Mbps, mean {prbs:.1} PRBs, mean {thr:.3} Mbps, final {} PRBs, buffer {} B",
            slice.slice, slice.demand, last.prbs, last.buffer_bytes
        );
    }

    trace.write_trace(&out.join("es.trace.tsv"))?;
    trace_to_profile(&trace, "es")?.write(&out.join("es.profile.tsv"))?;
    println!("wrote {}", out.display());
    Ok(())
}
