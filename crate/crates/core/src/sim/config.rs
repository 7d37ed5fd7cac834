use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::TimingSpec;

/// How an agent learns the allocation it adjusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Coupling {
    /// Each agent steps from the allocation it last commanded itself.
    #[default]
    Independent,
    /// Each agent steps from whatever allocation is currently in force,
    /// including one written by another agent.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    pub slice: String,
    /// Target downlink bitrate in Mbps.
    pub demand: f64,
    pub initial_prbs: u32,
}

impl SliceConfig {
    pub fn new(slice: impl Into<String>, demand: f64, initial_prbs: u32) -> Self {
        SliceConfig {
            slice: slice.into(),
            demand,
            initial_prbs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub total_prbs: u32,
    pub rbg_size: u32,
    pub slices: Vec<SliceConfig>,
    pub tick: f64,
    pub duration: f64,
    pub seed: u64,
    /// Mbps served per allocated PRB.
    pub capacity_per_prb: f64,
    /// Relative standard deviation of per-tick arrivals.
    pub demand_jitter: f64,
    pub coupling: Coupling,
}

impl Default for ScenarioConfig {
    /// 50 PRBs in groups of 3, eMBB/mMTC/URLLC at 2/1/0.5 Mbps, 600 s at
    /// 0.1 s ticks.
    fn default() -> Self {
        ScenarioConfig {
            total_prbs: 50,
            rbg_size: 3,
            slices: vec![
                SliceConfig::new("embb", 2.0, 15),
                SliceConfig::new("mmtc", 1.0, 9),
                SliceConfig::new("urllc", 0.5, 6),
            ],
            tick: 0.1,
            duration: 600.0,
            seed: 1,
            capacity_per_prb: 0.25,
            demand_jitter: 0.1,
            coupling: Coupling::Independent,
        }
    }
}

impl ScenarioConfig {
    pub fn tick_count(&self) -> usize {
        (self.duration / self.tick).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.total_prbs == 0 {
            return fail("total_prbs must be positive".into());
        }
        if self.rbg_size == 0 {
            return fail("rbg_size must be positive".into());
        }
        if self.slices.is_empty() {
            return fail("at least one slice is required".into());
        }
        if !(self.tick > 0.0) || !self.tick.is_finite() {
            return fail(format!("tick must be positive, got {}", self.tick));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return fail(format!("duration must be positive, got {}", self.duration));
        }
        if self.tick_count() == 0 {
            return fail("duration shorter than one tick".into());
        }
        if !(self.capacity_per_prb > 0.0) || !self.capacity_per_prb.is_finite() {
            return fail("capacity_per_prb must be positive".into());
        }
        if !(self.demand_jitter >= 0.0) || !self.demand_jitter.is_finite() {
            return fail("demand_jitter must be non-negative".into());
        }
        let mut initial = 0u64;
        for (i, s) in self.slices.iter().enumerate() {
            if !(s.demand >= 0.0) || !s.demand.is_finite() {
                return fail(format!("slice {} demand must be non-negative", s.slice));
            }
            if self.slices[..i].iter().any(|o| o.slice == s.slice) {
                return fail(format!("duplicate slice {}", s.slice));
            }
            if s.initial_prbs % self.rbg_size != 0 {
                return fail(format!(
                    "slice {} initial_prbs {} is not a multiple of rbg_size {}",
                    s.slice, s.initial_prbs, self.rbg_size
                ));
            }
            initial += u64::from(s.initial_prbs);
        }
        if initial > u64::from(self.total_prbs) {
            return fail(format!(
                "initial allocations ({initial}) exceed total_prbs ({})",
                self.total_prbs
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        ScenarioConfig::from_json(&crate::io::read_file(path)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Policy {
    EnergySaver,
    ThroughputMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub app_id: String,
    pub policy: Policy,
    #[serde(default = "default_step")]
    pub step_size: u32,
    pub timing: TimingSpec,
}

fn default_step() -> u32 {
    3
}

impl AgentSpec {
    pub fn new(app_id: impl Into<String>, policy: Policy, timing: TimingSpec) -> Self {
        AgentSpec {
            app_id: app_id.into(),
            policy,
            step_size: default_step(),
            timing,
        }
    }

    pub fn energy_saver(app_id: impl Into<String>, period: f64) -> Self {
        AgentSpec::new(app_id, Policy::EnergySaver, TimingSpec::every(period))
    }

    pub fn throughput_max(app_id: impl Into<String>, period: f64) -> Self {
        AgentSpec::new(app_id, Policy::ThroughputMax, TimingSpec::every(period))
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.timing.offset = offset;
        self
    }

    pub fn with_step(mut self, step: u32) -> Self {
        self.step_size = step;
        self
    }

    pub(crate) fn validate(&self, tick: f64) -> Result<()> {
        if self.step_size == 0 {
            return Err(Error::InvalidConfig(format!(
                "agent {} step_size must be at least 1",
                self.app_id
            )));
        }
        self.timing
            .validate()
            .map_err(|e| Error::InvalidConfig(format!("agent {}: {e}", self.app_id)))?;
        if tick > self.timing.period / 2.0 * (1.0 + 1e-9) {
            return Err(Error::InvalidConfig(format!(
                "agent {} period {} allows fewer than two ticks of {tick}",
                self.app_id, self.timing.period
            )));
        }
        Ok(())
    }
}

/// Agents file: either a bare list or `{"agents": [...]}`.
pub fn agents_from_json(text: &str) -> Result<Vec<AgentSpec>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum AgentsDoc {
        List(Vec<AgentSpec>),
        Wrapped { agents: Vec<AgentSpec> },
    }
    Ok(match serde_json::from_str(text)? {
        AgentsDoc::List(v) => v,
        AgentsDoc::Wrapped { agents } => agents,
    })
}
