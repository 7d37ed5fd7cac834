//! Desk-scale RAN slicing simulator used to generate profiles and the
//! concurrent ground truth they are checked against.

mod agent;
mod config;
mod engine;
mod trace;

pub use agent::{agent_decide, AllocationBounds, KpmSnapshot};
pub use config::{agents_from_json, AgentSpec, Coupling, Policy, ScenarioConfig, SliceConfig};
pub use engine::{run_concurrent, run_single};
pub use trace::{occupancy_fractions, trace_to_profile, SimTrace, TickRecord, TRACE_HEADER};
