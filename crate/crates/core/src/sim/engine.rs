//! Discrete-time last-writer-wins simulation of slicing agents.
//!
//! Every tick: agents due to act issue a full allocation vector (earlier
//! firing time first, so the latest one wins), then each slice's fluid queue
//! advances under the allocation in force. Agents decide from the KPMs of the
//! previous tick.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::agent::{agent_decide, AllocationBounds, KpmSnapshot};
use super::config::{AgentSpec, Coupling, ScenarioConfig};
use super::trace::{SimTrace, TickRecord};
use crate::error::{Error, Result};

/// Bytes per megabit.
const BYTES_PER_MBIT: f64 = 125_000.0;

/// Simulates one agent alone.
pub fn run_single(config: &ScenarioConfig, agent: &AgentSpec) -> Result<SimTrace> {
    simulate(config, std::slice::from_ref(agent))
}

/// Simulates two or more agents writing the same allocation.
pub fn run_concurrent(config: &ScenarioConfig, agents: &[AgentSpec]) -> Result<SimTrace> {
    if agents.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "concurrent run needs at least 2 agents, got {}",
            agents.len()
        )));
    }
    simulate(config, agents)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Multiplicative arrival noise for one (tick, slice), independent of the
/// order in which it is requested.
fn arrival_multiplier(seed: u64, tick: usize, slice: usize, jitter: f64) -> f64 {
    if jitter == 0.0 {
        return 1.0;
    }
    let key = splitmix64(splitmix64(seed ^ splitmix64(tick as u64)) ^ slice as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    let z: f64 = StandardNormal.sample(&mut rng);
    (1.0 + jitter * z).max(0.0)
}

fn firing_tick(agent: &AgentSpec, k: u64, tick: f64) -> (usize, f64) {
    let time = agent.timing.offset + k as f64 * agent.timing.period;
    ((time / tick + 1e-9).floor() as usize, time)
}

fn timestamp(k: usize, tick: f64) -> f64 {
    (k as f64 * tick * 1e9).round() / 1e9
}

pub(crate) fn simulate(config: &ScenarioConfig, agents: &[AgentSpec]) -> Result<SimTrace> {
    config.validate()?;
    if agents.is_empty() {
        return Err(Error::InvalidConfig("no agents".into()));
    }
    for (i, a) in agents.iter().enumerate() {
        a.validate(config.tick)?;
        if agents[..i].iter().any(|o| o.app_id == a.app_id) {
            return Err(Error::InvalidConfig(format!(
                "duplicate agent {}",
                a.app_id
            )));
        }
    }

    let n_slices = config.slices.len();
    let n_ticks = config.tick_count();
    let tick = config.tick;

    let initial: Vec<u32> = config.slices.iter().map(|s| s.initial_prbs).collect();
    let mut in_force = initial.clone();
    let mut commanded = vec![initial; agents.len()];
    let mut last_writer = None;
    let mut next_firing = vec![0u64; agents.len()];
    let mut buffers = vec![0u64; n_slices];
    let mut observed: Vec<KpmSnapshot> = config
        .slices
        .iter()
        .map(|s| KpmSnapshot {
            offered_mbps: s.demand,
            pending_bytes: (s.demand * tick * BYTES_PER_MBIT).round() as u64,
            buffer_bytes: 0,
            throughput_mbps: 0.0,
        })
        .collect();

    let mut records = Vec::with_capacity(n_ticks * n_slices);
    let mut due: Vec<(f64, usize)> = Vec::with_capacity(agents.len());
    for k in 0..n_ticks {
        due.clear();
        for (a, agent) in agents.iter().enumerate() {
            let (at, time) = firing_tick(agent, next_firing[a], tick);
            if at == k {
                due.push((time, a));
                next_firing[a] += 1;
            }
        }
        due.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

        for &(_, a) in &due {
            let agent = &agents[a];
            let mut alloc = match config.coupling {
                Coupling::Independent => commanded[a].clone(),
                Coupling::Shared => in_force.clone(),
            };
            for s in 0..n_slices {
                let others: u32 = alloc
                    .iter()
                    .enumerate()
                    .filter(|(t, _)| *t != s)
                    .map(|(_, v)| *v)
                    .sum();
                let bounds = AllocationBounds {
                    rbg_size: config.rbg_size,
                    ceiling: config.total_prbs.saturating_sub(others),
                    capacity_per_prb: config.capacity_per_prb,
                };
                alloc[s] = agent_decide(
                    agent.policy,
                    alloc[s],
                    &observed[s],
                    agent.step_size,
                    &bounds,
                );
            }
            in_force = alloc.clone();
            commanded[a] = alloc;
            last_writer = Some(a);
        }

        let ts = timestamp(k, tick);
        for (s, slice) in config.slices.iter().enumerate() {
            let mult = arrival_multiplier(config.seed, k, s, config.demand_jitter);
            let offered_mbps = slice.demand * mult;
            let arrived = (offered_mbps * tick * BYTES_PER_MBIT).round() as u64;
            let capacity =
                (config.capacity_per_prb * f64::from(in_force[s]) * tick * BYTES_PER_MBIT + 1e-6)
                    .floor() as u64;
            let pending = buffers[s] + arrived;
            let served = pending.min(capacity);
            buffers[s] = pending - served;
            let throughput_mbps = served as f64 / BYTES_PER_MBIT / tick;
            observed[s] = KpmSnapshot {
                offered_mbps,
                pending_bytes: pending,
                buffer_bytes: buffers[s],
                throughput_mbps,
            };
            records.push(TickRecord {
                tick: k,
                timestamp: ts,
                slice: s,
                prbs: in_force[s],
                buffer_bytes: buffers[s],
                throughput_mbps,
                arrived_bytes: arrived,
                served_bytes: served,
                capacity_bytes: capacity,
                last_writer,
            });
        }
    }

    Ok(SimTrace {
        tick,
        total_prbs: config.total_prbs,
        rbg_size: config.rbg_size,
        slices: config.slices.iter().map(|s| s.slice.clone()).collect(),
        demands: config.slices.iter().map(|s| s.demand).collect(),
        agents: agents.iter().map(|a| a.app_id.clone()).collect(),
        seed: config.seed,
        records,
    })
}
