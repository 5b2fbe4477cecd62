//! Run outputs: the invocation log, policy decision log, energy ledger
//! and per-workflow outcomes.

use serde::{Deserialize, Serialize};

use crate::workflow::WorkflowOutcome;
use crate::{Seconds, Timestamp};

pub const WATT_SECONDS_PER_WATT_HOUR: f64 = 3_600.0;

/// How one replica invocation ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvocationOutcome {
    /// Ran to its full nominal duration.
    Completed,
    /// Terminated by a primary-user login or the nightly reboot.
    Evicted,
    /// Terminated because a sibling replica completed first (or the run
    /// hit its horizon with the invocation still on a resource).
    Cancelled,
}

/// One closed attempt of one replica on one resource. τ is `end − start`;
/// `good` marks the single winning invocation of a completed task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvocationRecord {
    pub job: u32,
    /// `None` for background (non-workflow) tasks.
    pub workflow_id: Option<String>,
    pub task_id: String,
    pub replica: u32,
    pub invocation: u32,
    pub resource: u32,
    pub start: Timestamp,
    pub end: Timestamp,
    /// Full runtime the task needs on a resource.
    pub nominal: Seconds,
    pub outcome: InvocationOutcome,
    pub good: bool,
    pub energy_rate_w: f64,
}

impl InvocationRecord {
    pub fn tau(&self) -> Seconds {
        (self.end - self.start) as Seconds
    }

    /// Energy of this invocation in watt-seconds: τ·E.
    pub fn energy_ws(&self) -> f64 {
        self.tau() as f64 * self.energy_rate_w
    }
}

/// One replica-count decision, with the reward filled in once the task's
/// replicas have all closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub time: Timestamp,
    pub workflow_id: String,
    pub task_id: String,
    pub hour: u8,
    /// Bandit state bin; absent for the static policies.
    pub phi_bin: Option<u8>,
    /// The contingency proportion the decision saw (φ′ or φ″ per mode).
    pub phi: f64,
    pub action: u8,
    pub reward: Option<f64>,
}

/// Good/bad energy of one task, in watt-seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskEnergy {
    pub workflow_id: Option<String>,
    pub task_id: String,
    pub good_ws: f64,
    pub bad_ws: f64,
}

/// Energy accounting for a run. Good/bad cover workflow-task invocations
/// per the replica accounting rule; background tasks are kept apart so
/// replication experiments compare like with like; idle energy is the
/// draw of resources with no HTC work, no session, and no reboot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub tasks: Vec<TaskEnergy>,
    pub workflow_good_ws: f64,
    pub workflow_bad_ws: f64,
    pub background_good_ws: f64,
    pub background_bad_ws: f64,
    pub idle_ws: f64,
}

impl EnergyLedger {
    pub fn good_wh(&self) -> f64 {
        self.workflow_good_ws / WATT_SECONDS_PER_WATT_HOUR
    }

    pub fn bad_wh(&self) -> f64 {
        self.workflow_bad_ws / WATT_SECONDS_PER_WATT_HOUR
    }

    pub fn idle_wh(&self) -> f64 {
        self.idle_ws / WATT_SECONDS_PER_WATT_HOUR
    }

    pub fn background_wh(&self) -> f64 {
        (self.background_good_ws + self.background_bad_ws) / WATT_SECONDS_PER_WATT_HOUR
    }
}

/// Aggregate counters for a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub workflows_submitted: u64,
    pub workflows_completed: u64,
    pub workflows_pending_at_horizon: u64,
    pub background_submitted: u64,
    pub background_completed: u64,
    pub evictions: u64,
    pub cancelled_running: u64,
    pub cancelled_queued: u64,
    pub events_processed: u64,
    pub horizon_s: Timestamp,
    /// Set when the horizon cut off pending work (reported, not fatal).
    pub horizon_exceeded_with_pending_work: bool,
}

/// Everything a run produces. Serialises deterministically: all
/// collections are in arrival or close order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub outcomes: Vec<WorkflowOutcome>,
    pub invocations: Vec<InvocationRecord>,
    pub decisions: Vec<DecisionRecord>,
    pub ledger: EnergyLedger,
    pub stats: RunStats,
}

impl SimulationReport {
    pub fn completed_outcomes(&self) -> impl Iterator<Item = &WorkflowOutcome> {
        self.outcomes.iter().filter(|o| o.completed())
    }
}
