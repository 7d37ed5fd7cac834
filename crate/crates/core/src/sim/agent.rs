use super::config::Policy;

/// What an agent sees of one slice when it decides, one tick late.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KpmSnapshot {
    /// Arrival rate over the observed tick, in Mbps.
    pub offered_mbps: f64,
    /// Bytes waiting for service at the scheduling instant, before draining.
    pub pending_bytes: u64,
    /// Bytes left queued after service.
    pub buffer_bytes: u64,
    pub throughput_mbps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationBounds {
    pub rbg_size: u32,
    /// PRBs left for this slice after every other slice's allocation.
    pub ceiling: u32,
    pub capacity_per_prb: f64,
}

impl AllocationBounds {
    fn aligned_ceiling(&self) -> u32 {
        self.ceiling / self.rbg_size * self.rbg_size
    }

    /// Smallest RBG-aligned allocation (at least one RBG) whose capacity
    /// covers `load_mbps`.
    pub fn sufficiency_floor(&self, load_mbps: f64) -> u32 {
        let needed = (load_mbps / self.capacity_per_prb - 1e-9).ceil().max(0.0);
        let needed = needed.min(u32::MAX as f64) as u32;
        let floor = needed.div_ceil(self.rbg_size).saturating_mul(self.rbg_size);
        floor.max(self.rbg_size)
    }

    /// Nearest RBG multiple (ties upward) that fits under the ceiling.
    fn align(&self, prbs: u32) -> u32 {
        let rbg = self.rbg_size;
        let rounded = (prbs + rbg / 2) / rbg * rbg;
        rounded.min(self.aligned_ceiling())
    }
}

/// Next allocation an agent commands for one slice.
///
/// The energy saver steps down by `step` but never below the sufficiency
/// floor for the observed load. The throughput maximizer steps up by `step`
/// while traffic is pending, up to the slice's share of the budget.
pub fn agent_decide(
    policy: Policy,
    current_prbs: u32,
    observed: &KpmSnapshot,
    step: u32,
    bounds: &AllocationBounds,
) -> u32 {
    let target = match policy {
        Policy::EnergySaver => {
            let floor = bounds.sufficiency_floor(observed.offered_mbps);
            current_prbs.saturating_sub(step).max(floor)
        }
        Policy::ThroughputMax => {
            if observed.pending_bytes > 0 {
                current_prbs.saturating_add(step)
            } else {
                current_prbs
            }
        }
    };
    bounds.align(target.min(bounds.ceiling))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(ceiling: u32) -> AllocationBounds {
        AllocationBounds {
            rbg_size: 3,
            ceiling,
            capacity_per_prb: 0.25,
        }
    }

    fn load(mbps: f64, pending: u64) -> KpmSnapshot {
        KpmSnapshot {
            offered_mbps: mbps,
            pending_bytes: pending,
            ..Default::default()
        }
    }

    #[test]
    fn energy_saver_steps_down_above_floor() {
        // 9 PRBs carry 2.25 Mbps.
        assert_eq!(bounds(50).sufficiency_floor(2.25), 9);
        let d = agent_decide(Policy::EnergySaver, 12, &load(2.25, 1), 3, &bounds(50));
        assert_eq!(d, 9);
    }

    #[test]
    fn energy_saver_holds_at_floor() {
        assert_eq!(bounds(50).sufficiency_floor(1.5), 6);
        let d = agent_decide(Policy::EnergySaver, 6, &load(1.5, 1), 3, &bounds(50));
        assert_eq!(d, 6);
    }

    #[test]
    fn energy_saver_rises_to_floor_and_keeps_one_rbg() {
        let d = agent_decide(Policy::EnergySaver, 3, &load(2.0, 0), 3, &bounds(50));
        assert_eq!(d, 9);
        let d = agent_decide(Policy::EnergySaver, 3, &load(0.0, 0), 3, &bounds(50));
        assert_eq!(d, 3);
    }

    #[test]
    fn throughput_max_steps_up_to_ceiling() {
        let d = agent_decide(Policy::ThroughputMax, 27, &load(2.0, 10), 3, &bounds(30));
        assert_eq!(d, 30);
        let d = agent_decide(Policy::ThroughputMax, 30, &load(2.0, 10), 3, &bounds(30));
        assert_eq!(d, 30);
        // Unaligned ceiling rounds down to the last whole RBG.
        let d = agent_decide(Policy::ThroughputMax, 21, &load(2.0, 10), 3, &bounds(23));
        assert_eq!(d, 21);
    }

    #[test]
    fn throughput_max_idles_without_pending_traffic() {
        let d = agent_decide(Policy::ThroughputMax, 12, &load(2.0, 0), 3, &bounds(50));
        assert_eq!(d, 12);
    }

    #[test]
    fn results_are_rbg_aligned() {
        for current in (0..=48).step_by(3) {
            for step in 1..7 {
                for policy in [Policy::EnergySaver, Policy::ThroughputMax] {
                    let d = agent_decide(policy, current, &load(1.7, 5), step, &bounds(40));
                    assert_eq!(d % 3, 0);
                    assert!(d <= 39);
                }
            }
        }
    }
}
