//! replisim — a trace-driven discrete-event simulator of a multi-use
//! computing cluster that enacts DAG workflows under single-submission,
//! fixed-replica, and bandit-learned replication policies.
//!
//! The crate is organised around six modules:
//!
//! * [`workflow`] — DAG validation, critical paths, deadlines and per-task
//!   contingency arithmetic.
//! * [`policy`] — replica-count policies: single, fixed-N, and an ε-greedy
//!   n-armed bandit with pluggable ε schedules.
//! * [`workload`] — synthetic interactive-user and task trace generators,
//!   plus workflow templates and workflow injection.
//! * [`sim`] — the event-driven cluster engine: queueing, eviction,
//!   nightly reboots, replica management and energy accounting.
//! * [`metrics`] — success counts, excess-proportion CDF, completion
//!   heatmap and energy summaries, with CSV emitters.
//! * [`cli`] — experiment configuration, single runs and sweeps.

pub mod cli;
pub mod metrics;
pub mod policy;
pub mod sim;
pub mod workflow;
pub mod workload;

/// Seconds since the simulation epoch (midnight of day zero).
pub type Timestamp = i64;

/// A non-negative span of whole seconds.
pub type Seconds = u64;

pub const SECONDS_PER_HOUR: i64 = 3_600;
pub const SECONDS_PER_DAY: i64 = 86_400;

/// Hour of day (0–23) for a timestamp, robust to negative times.
pub fn hour_of_day(t: Timestamp) -> u8 {
    (t.rem_euclid(SECONDS_PER_DAY) / SECONDS_PER_HOUR) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hour_of_day_wraps() {
        assert_eq!(hour_of_day(0), 0);
        assert_eq!(hour_of_day(13 * 3600 + 45 * 60), 13);
        assert_eq!(hour_of_day(SECONDS_PER_DAY + 3 * 3600), 3);
        assert_eq!(hour_of_day(-3600), 23);
    }
}
