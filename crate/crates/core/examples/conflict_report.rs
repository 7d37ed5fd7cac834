//! Simulates ES and TM alone, then scores how much they disagree.
//!
//! cargo run --release --example conflict_report

use conflict_lens::sim::{run_single, trace_to_profile, AgentSpec, ScenarioConfig};
use conflict_lens::{conflict_report, default_kpm_keys};

fn main() -> conflict_lens::Result<()> {
    let cfg = ScenarioConfig::default();
    let es = trace_to_profile(
        &run_single(&cfg, &AgentSpec::energy_saver("es", 1.0))?,
        "es",
    )?;
    let tm = trace_to_profile(
        &run_single(&cfg, &AgentSpec::throughput_max("tm", 1.0))?,
        "tm",
    )?;

    let variables = es.keys();
    let slices: Vec<&str> = cfg.slices.iter().map(|s| s.slice.as_str()).collect();
    let report = conflict_report(&es, &tm, &variables, &default_kpm_keys(slices))?;

    println!("variable:slice\tks\tint");
    for (key, d) in &report.per_variable {
        println!("{key}\t{:.4}\t{:.4}", d.ks, d.int);
    }
    println!(
        "\nseverity over {} KPMs = {:.4}",
        report.severity_kpms.len(),
        report.severity
    );
    Ok(())
}
