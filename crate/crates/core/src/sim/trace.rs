use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::profile::{Observation, Profile, DL_BUFFER_BYTES, SLICE_PRB, TX_BRATE_DL_MBPS};

pub const TRACE_HEADER: &str = "timestamp\tslice\tprbs\tbuffer_bytes\tthroughput_mbps\tlast_writer";

/// State of one slice at the end of one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub tick: usize,
    pub timestamp: f64,
    pub slice: usize,
    pub prbs: u32,
    pub buffer_bytes: u64,
    pub throughput_mbps: f64,
    pub arrived_bytes: u64,
    pub served_bytes: u64,
    pub capacity_bytes: u64,
    /// Index into [`SimTrace::agents`] of the agent whose command is in force.
    pub last_writer: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub tick: f64,
    pub total_prbs: u32,
    pub rbg_size: u32,
    pub slices: Vec<String>,
    pub demands: Vec<f64>,
    pub agents: Vec<String>,
    pub seed: u64,
    /// Tick-major, then slice order.
    pub records: Vec<TickRecord>,
}

impl SimTrace {
    pub fn tick_count(&self) -> usize {
        self.records.len() / self.slices.len().max(1)
    }

    pub fn slice_records(&self, slice: &str) -> impl Iterator<Item = &TickRecord> {
        let idx = self.slices.iter().position(|s| s == slice);
        self.records.iter().filter(move |r| Some(r.slice) == idx)
    }

    pub fn writer_name(&self, record: &TickRecord) -> Option<&str> {
        record.last_writer.map(|a| self.agents[a].as_str())
    }

    /// Per-tick debugging dump, one row per tick and slice.
    pub fn to_trace_tsv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.records.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.timestamp,
                self.slices[r.slice],
                r.prbs,
                r.buffer_bytes,
                r.throughput_mbps,
                self.writer_name(r).unwrap_or("-"),
            ));
        }
        out
    }

    pub fn write_trace(&self, path: &Path) -> Result<()> {
        crate::io::write_file(path, self.to_trace_tsv())
    }
}

/// Converts a trace into a profile carrying PRBs, buffer occupancy and
/// throughput for every slice at every tick.
pub fn trace_to_profile(trace: &SimTrace, app_id: &str) -> Result<Profile> {
    if trace.records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut obs = Vec::with_capacity(trace.records.len() * 3);
    for r in &trace.records {
        let slice = trace.slices[r.slice].as_str();
        obs.push(Observation::new(
            r.timestamp,
            SLICE_PRB,
            slice,
            f64::from(r.prbs),
        )?);
        obs.push(Observation::new(
            r.timestamp,
            DL_BUFFER_BYTES,
            slice,
            r.buffer_bytes as f64,
        )?);
        obs.push(Observation::new(
            r.timestamp,
            TX_BRATE_DL_MBPS,
            slice,
            r.throughput_mbps,
        )?);
    }
    Ok(Profile::new(app_id, obs)
        .with_metadata("seed", trace.seed.to_string())
        .with_metadata("tick", trace.tick.to_string())
        .with_metadata("agents", trace.agents.join(",")))
}

/// Fraction of ticks each agent's command was in force. Ticks before the
/// first action are excluded.
pub fn occupancy_fractions(trace: &SimTrace) -> Result<BTreeMap<String, f64>> {
    if trace.records.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let mut counts = vec![0usize; trace.agents.len()];
    let mut total = 0usize;
    for r in trace.records.iter().filter(|r| r.slice == 0) {
        if let Some(a) = r.last_writer {
            counts[a] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::NoWriters);
    }
    Ok(trace
        .agents
        .iter()
        .zip(counts)
        .map(|(name, c)| (name.clone(), c as f64 / total as f64))
        .collect())
}
