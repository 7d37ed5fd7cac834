//! Compares the two coupling modes: agents stepping from their own last
//! command versus from whatever allocation is in force.
//!
//! cargo run --release --example feedback_coupling

use conflict_lens::sim::{
    occupancy_fractions, run_concurrent, run_single, trace_to_profile, AgentSpec, Coupling,
    ScenarioConfig,
};
use conflict_lens::{
    build_ecdf, int_distance, ks_distance, weighted_ecdf_average, Profile, SeriesKey, WeightMode,
    WeightVector,
};

fn prbs(p: &Profile) -> conflict_lens::Result<conflict_lens::Ecdf> {
    build_ecdf(&p.series(&SeriesKey::new("slice_prb", "embb"))?)
}

fn main() -> conflict_lens::Result<()> {
    let agents = [
        AgentSpec::energy_saver("es", 1.0),
        AgentSpec::throughput_max("tm", 1.0).with_offset(0.5),
    ];
    for coupling in [Coupling::Independent, Coupling::Shared] {
        let cfg = ScenarioConfig {
            coupling,
            ..ScenarioConfig::default()
        };
        let es = prbs(&trace_to_profile(&run_single(&cfg, &agents[0])?, "es")?)?;
        let tm = prbs(&trace_to_profile(&run_single(&cfg, &agents[1])?, "tm")?)?;
        let trace = run_concurrent(&cfg, &agents)?;
        let occ = occupancy_fractions(&trace)?;
        let measured = prbs(&trace_to_profile(&trace, "both")?)?;
        let w = WeightVector::new(vec![occ["es"], 1.0 - occ["es"]], WeightMode::Effective)?;
        let pred = weighted_ecdf_average(&[es, tm], &w)?;
        println!(
            "{coupling:?}: occupancy es {:.3}, mixture vs measured ks {:.4} int {:.4}",
            occ["es"],
            ks_distance(&pred, &measured),
            int_distance(&pred, &measured)
        );
    }
    Ok(())
}
