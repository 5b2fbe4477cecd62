//! Discrete-event cluster engine. Enacts a mixed workload of background
//! tasks and DAG workflows on resources shared with interactive primary
//! users, modelling eviction-and-relaunch, nightly reboots, replica
//! management and good/bad/idle energy accounting.

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{compute_sigma, PolicyKind, State};
use crate::workflow::{
    self, ready_tasks, DurationSource, TaskIndex, WorkflowOutcome, WorkflowSpec,
};
use crate::workload::WorkloadRow;
use crate::{hour_of_day, Seconds, Timestamp, SECONDS_PER_DAY, SECONDS_PER_HOUR};

mod event;
pub mod report;
pub mod trace;

pub use report::{
    DecisionRecord, EnergyLedger, InvocationOutcome, InvocationRecord, RunStats,
    SimulationReport, TaskEnergy,
};
pub use trace::{parse_interactive_csv, validate_sessions, write_interactive_csv, Session};

use event::{EventKind, EventQueue};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
}

/// The nightly maintenance window: all resources evict their work at
/// `hour` and stay unavailable for `duration_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RebootConfig {
    pub enabled: bool,
    pub hour: u8,
    pub duration_s: Seconds,
}

impl Default for RebootConfig {
    fn default() -> Self {
        RebootConfig { enabled: true, hour: 3, duration_s: 600 }
    }
}

/// One machine of the cluster. Powers are uniform across the cluster in
/// this model, but each invocation still records the rate of the resource
/// it ran on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resource {
    pub id: u32,
    pub power_active_w: f64,
    pub power_idle_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub resources: u32,
    pub power_active_w: f64,
    pub power_idle_w: f64,
    pub reboot: RebootConfig,
    /// Flat latency charged between a task becoming eligible and its
    /// replicas joining the queue; stands in for per-edge link times.
    pub scheduling_latency_s: Seconds,
    pub horizon_days: u32,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            resources: 50,
            power_active_w: 120.0,
            power_idle_w: 10.0,
            reboot: RebootConfig::default(),
            scheduling_latency_s: 0,
            horizon_days: 7,
        }
    }
}

impl ClusterConfig {
    pub fn horizon_s(&self) -> Timestamp {
        self.horizon_days as i64 * SECONDS_PER_DAY
    }

    /// Cluster-average active draw Ξ, the normaliser in σ_t.
    pub fn xi_watts(&self) -> f64 {
        self.power_active_w
    }

    pub fn resource(&self, id: u32) -> Resource {
        Resource { id, power_active_w: self.power_active_w, power_idle_w: self.power_idle_w }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.resources == 0 {
            return Err(SimError::InvalidConfig("cluster needs at least one resource".into()));
        }
        if !(self.power_active_w.is_finite() && self.power_idle_w.is_finite()) {
            return Err(SimError::InvalidConfig("power draws must be finite".into()));
        }
        if self.power_idle_w < 0.0 || self.power_active_w < self.power_idle_w {
            return Err(SimError::InvalidConfig("need power_active >= power_idle >= 0".into()));
        }
        if self.reboot.hour >= 24 {
            return Err(SimError::InvalidConfig("reboot hour must be 0-23".into()));
        }
        if self.horizon_days == 0 {
            return Err(SimError::InvalidConfig("horizon must be at least one day".into()));
        }
        Ok(())
    }
}

/// Which contingency figure feeds the policy: φ′ (slack balanced over the
/// downstream path) or φ″ (all slack on the current task).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalancingMode {
    Balanced,
    Current,
}

struct ResourceState {
    spec: Resource,
    running: Option<(u32, u32)>,
    sessions: u32,
    reboot_until: Timestamp,
    last_change: Timestamp,
    idle_ws: f64,
}

impl ResourceState {
    fn new(spec: Resource) -> Self {
        ResourceState {
            spec,
            running: None,
            sessions: 0,
            reboot_until: Timestamp::MIN,
            last_change: 0,
            idle_ws: 0.0,
        }
    }

    fn free(&self, now: Timestamp) -> bool {
        self.running.is_none() && self.sessions == 0 && now >= self.reboot_until
    }

    /// Folds the interval since the last state change into the idle
    /// accumulator. Must be called before any occupancy change.
    fn accrue(&mut self, now: Timestamp) {
        if self.running.is_none() && self.sessions == 0 {
            let from = self.last_change.max(self.reboot_until.min(now));
            if now > from {
                self.idle_ws += (now - from) as f64 * self.spec.power_idle_w;
            }
        }
        self.last_change = now;
    }
}

#[derive(Debug, Clone, Copy)]
enum Origin {
    Workflow { wf: u32, task: TaskIndex },
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ReplicaPhase {
    Queued,
    Running { resource: u32, started: Timestamp, token: u64 },
    Closed,
}

struct Replica {
    phase: ReplicaPhase,
    /// Number of invocations started so far (the j counter).
    invocations: u32,
}

struct JobDecision {
    state: Option<State>,
    action: u8,
    phi: f64,
    record: usize,
}

struct Job {
    origin: Origin,
    workflow_id: Option<String>,
    task_id: String,
    nominal: Seconds,
    estimated: Seconds,
    first_submit: Timestamp,
    replicas: Vec<Replica>,
    decision: Option<JobDecision>,
    completed: bool,
    good_ws: f64,
    bad_ws: f64,
}

struct WorkflowRun {
    spec: WorkflowSpec,
    local_est: Vec<Seconds>,
    max_child_est: Vec<Seconds>,
    cr_est: Seconds,
    deadline: f64,
    completed: BTreeSet<TaskIndex>,
    scheduled: BTreeSet<TaskIndex>,
    done: bool,
    completion_time: Option<Timestamp>,
}

struct Engine<'a> {
    config: &'a ClusterConfig,
    policy: &'a mut PolicyKind,
    mode: BalancingMode,
    rng: ChaCha8Rng,
    rows: &'a [WorkloadRow],
    now: Timestamp,
    events: EventQueue,
    resources: Vec<ResourceState>,
    jobs: Vec<Job>,
    queue: VecDeque<(u32, u32)>,
    workflows: Vec<WorkflowRun>,
    invocations: Vec<InvocationRecord>,
    decisions: Vec<DecisionRecord>,
    stats: RunStats,
    next_token: u64,
    dispatch_scheduled_at: Option<Timestamp>,
}

/// Runs the workload to quiescence or the horizon. Deterministic for a
/// given seed: two runs with equal inputs produce identical reports.
pub fn run(
    cluster: &ClusterConfig,
    sessions: &[Session],
    workload: &[WorkloadRow],
    policy: &mut PolicyKind,
    mode: BalancingMode,
    seed: u64,
) -> Result<SimulationReport, SimError> {
    cluster.validate()?;
    validate_sessions(sessions, cluster.resources)?;
    let mut last = Timestamp::MIN;
    for (i, row) in workload.iter().enumerate() {
        let t = row.submit_time();
        if t < last {
            return Err(SimError::MalformedTrace(format!(
                "workload row {i}: not sorted by submit time"
            )));
        }
        last = t;
    }

    let mut engine = Engine {
        config: cluster,
        policy,
        mode,
        rng: ChaCha8Rng::seed_from_u64(seed),
        rows: workload,
        now: 0,
        events: EventQueue::default(),
        resources: (0..cluster.resources)
            .map(|id| ResourceState::new(cluster.resource(id)))
            .collect(),
        jobs: Vec::new(),
        queue: VecDeque::new(),
        workflows: Vec::new(),
        invocations: Vec::new(),
        decisions: Vec::new(),
        stats: RunStats { horizon_s: cluster.horizon_s(), ..RunStats::default() },
        next_token: 0,
        dispatch_scheduled_at: None,
    };
    engine.seed_events(sessions);
    engine.drive();
    Ok(engine.finalize())
}

impl<'a> Engine<'a> {
    fn seed_events(&mut self, sessions: &[Session]) {
        let horizon = self.config.horizon_s();
        for s in sessions {
            if s.login <= horizon {
                self.events.push(
                    s.login,
                    EventKind::InteractiveLogin { resource: s.resource, logout: s.logout },
                );
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            let t = row.submit_time();
            if t <= horizon {
                self.events.push(t, EventKind::Arrival { row: i as u32 });
            }
        }
        if self.config.reboot.enabled {
            let mut t = self.config.reboot.hour as i64 * SECONDS_PER_HOUR;
            while t <= horizon {
                self.events.push(t, EventKind::NightlyReboot);
                t += SECONDS_PER_DAY;
            }
        }
    }

    fn drive(&mut self) {
        let horizon = self.config.horizon_s();
        while let Some(ev) = self.events.pop() {
            if ev.time > horizon {
                break;
            }
            self.now = ev.time;
            self.stats.events_processed += 1;
            match ev.kind {
                EventKind::InvocationComplete { job, replica, token } => {
                    self.on_invocation_complete(job, replica, token)
                }
                EventKind::InteractiveLogout { resource } => self.on_logout(resource),
                EventKind::InteractiveLogin { resource, logout } => self.on_login(resource, logout),
                EventKind::NightlyReboot => self.on_reboot(),
                EventKind::Arrival { row } => self.on_arrival(row),
                EventKind::TaskReady { workflow, task } => self.on_task_ready(workflow, task),
                EventKind::QueueDispatch => self.dispatch_queue(),
            }
        }
    }

    fn request_dispatch(&mut self) {
        if self.dispatch_scheduled_at != Some(self.now) {
            self.dispatch_scheduled_at = Some(self.now);
            self.events.push(self.now, EventKind::QueueDispatch);
        }
    }

    // ── Arrivals ────────────────────────────────────────────────────────

    fn on_arrival(&mut self, row: u32) {
        match &self.rows[row as usize] {
            WorkloadRow::Task { submit, duration } => {
                debug_assert_eq!(*submit, self.now);
                let job = Job {
                    origin: Origin::Background,
                    workflow_id: None,
                    task_id: format!("task-{row:06}"),
                    nominal: *duration,
                    estimated: *duration,
                    first_submit: self.now,
                    replicas: vec![Replica { phase: ReplicaPhase::Queued, invocations: 0 }],
                    decision: None,
                    completed: false,
                    good_ws: 0.0,
                    bad_ws: 0.0,
                };
                let id = self.jobs.len() as u32;
                self.jobs.push(job);
                self.queue.push_back((id, 0));
                self.stats.background_submitted += 1;
                self.request_dispatch();
            }
            WorkloadRow::Workflow { submit, spec } => {
                let mut spec = spec.clone();
                spec.submit_time = *submit;
                let local_est = workflow::all_local_paths(&spec, DurationSource::Estimated);
                let max_child_est: Vec<Seconds> = (0..spec.tasks.len())
                    .map(|t| {
                        spec.tasks[t].successors.iter().map(|&c| local_est[c]).max().unwrap_or(0)
                    })
                    .collect();
                let cr_est = local_est[spec.start];
                let deadline = workflow::deadline(self.now, spec.contingency, cr_est);
                let mut completed = BTreeSet::new();
                completed.insert(spec.start);
                let run = WorkflowRun {
                    local_est,
                    max_child_est,
                    cr_est,
                    deadline,
                    completed,
                    scheduled: BTreeSet::new(),
                    done: false,
                    completion_time: None,
                    spec,
                };
                let wf_idx = self.workflows.len() as u32;
                self.workflows.push(run);
                self.stats.workflows_submitted += 1;
                self.schedule_ready_tasks(wf_idx);
            }
        }
    }

    fn schedule_ready_tasks(&mut self, wf_idx: u32) {
        let latency = self.config.scheduling_latency_s as i64;
        let now = self.now;
        let run = &mut self.workflows[wf_idx as usize];
        let ready = ready_tasks(&run.spec, &run.completed);
        for t in ready {
            if run.scheduled.insert(t) {
                self.events
                    .push(now + latency, EventKind::TaskReady { workflow: wf_idx, task: t });
            }
        }
    }

    // ── Task submission ─────────────────────────────────────────────────

    fn on_task_ready(&mut self, wf_idx: u32, task: TaskIndex) {
        let run = &self.workflows[wf_idx as usize];
        let spec_task = &run.spec.tasks[task];
        let local = run.local_est[task];
        let phi_balanced = if local > 0 {
            workflow::contingency_balanced(run.deadline, self.now, local).unwrap()
        } else {
            // Degenerate all-zero-estimate tail: nothing to balance over,
            // the task is unconstrained.
            f64::INFINITY
        };
        let phi_current = if spec_task.estimated > 0 {
            workflow::contingency_current(
                run.deadline,
                self.now,
                spec_task.estimated,
                run.max_child_est[task],
            )
            .unwrap()
        } else {
            phi_balanced
        };
        let phi_used = match self.mode {
            BalancingMode::Balanced => phi_balanced,
            BalancingMode::Current => phi_current,
        };

        let decision = self.policy.decide(self.now, phi_used, &mut self.rng);
        let workflow_id = run.spec.id.clone();
        let task_id = spec_task.id.clone();
        let nominal = spec_task.actual;
        let estimated = spec_task.estimated;
        let record = self.decisions.len();
        self.decisions.push(DecisionRecord {
            time: self.now,
            workflow_id: workflow_id.clone(),
            task_id: task_id.clone(),
            hour: hour_of_day(self.now),
            phi_bin: decision.state.map(|s| s.phi_bin),
            phi: phi_used,
            action: decision.action,
            reward: None,
        });

        let replicas = (0..decision.action)
            .map(|_| Replica { phase: ReplicaPhase::Queued, invocations: 0 })
            .collect();
        let job = Job {
            origin: Origin::Workflow { wf: wf_idx, task },
            workflow_id: Some(workflow_id),
            task_id,
            nominal,
            estimated,
            first_submit: self.now,
            replicas,
            decision: Some(JobDecision {
                state: decision.state,
                action: decision.action,
                phi: phi_used,
                record,
            }),
            completed: false,
            good_ws: 0.0,
            bad_ws: 0.0,
        };
        let id = self.jobs.len() as u32;
        self.jobs.push(job);
        for r in 0..decision.action as u32 {
            self.queue.push_back((id, r));
        }
        self.request_dispatch();
    }

    // ── Placement ───────────────────────────────────────────────────────

    fn dispatch_queue(&mut self) {
        if self.queue.is_empty() {
            return;
        }
        let now = self.now;
        let mut free: Vec<u32> = self
            .resources
            .iter()
            .filter(|r| r.free(now))
            .map(|r| r.spec.id)
            .collect();
        let mut kept: VecDeque<(u32, u32)> = VecDeque::new();
        let pending = std::mem::take(&mut self.queue);
        for (job, replica) in pending {
            if self.jobs[job as usize].replicas[replica as usize].phase != ReplicaPhase::Queued {
                continue; // stale entry
            }
            if free.is_empty() {
                kept.push_back((job, replica));
                continue;
            }
            // FCFS with skip: an entry that cannot be placed does not block
            // later entries. A free resource never runs a sibling replica,
            // but the filter keeps the anti-colocation rule explicit.
            let eligible: Vec<usize> = (0..free.len())
                .filter(|&i| {
                    let res = free[i];
                    self.jobs[job as usize].replicas.iter().all(|r| {
                        !matches!(r.phase, ReplicaPhase::Running { resource, .. } if resource == res)
                    })
                })
                .collect();
            if eligible.is_empty() {
                kept.push_back((job, replica));
                continue;
            }
            let pick = eligible[self.rng.gen_range(0..eligible.len())];
            let resource = free.swap_remove(pick);
            self.place(job, replica, resource);
        }
        self.queue = kept;
    }

    fn place(&mut self, job: u32, replica: u32, resource: u32) {
        let now = self.now;
        let res = &mut self.resources[resource as usize];
        res.accrue(now);
        res.running = Some((job, replica));
        let token = self.next_token;
        self.next_token += 1;
        let j = &mut self.jobs[job as usize];
        let r = &mut j.replicas[replica as usize];
        r.invocations += 1;
        r.phase = ReplicaPhase::Running { resource, started: now, token };
        self.events
            .push(now + j.nominal as i64, EventKind::InvocationComplete { job, replica, token });
    }

    /// Closes the running invocation of (job, replica) with the given
    /// outcome, frees its resource and accounts its energy.
    fn close_invocation(&mut self, job: u32, replica: u32, outcome: InvocationOutcome, good: bool) {
        let now = self.now;
        let j = &mut self.jobs[job as usize];
        let r = &mut j.replicas[replica as usize];
        let (resource, started) = match r.phase {
            ReplicaPhase::Running { resource, started, .. } => (resource, started),
            _ => unreachable!("close_invocation on a non-running replica"),
        };
        r.phase = ReplicaPhase::Closed;
        let invocation = r.invocations;
        let res = &mut self.resources[resource as usize];
        res.accrue(now);
        res.running = None;
        let rate = res.spec.power_active_w;
        let tau = (now - started) as Seconds;
        let ws = tau as f64 * rate;
        if good {
            j.good_ws += ws;
        } else {
            j.bad_ws += ws;
        }
        self.invocations.push(InvocationRecord {
            job,
            workflow_id: j.workflow_id.clone(),
            task_id: j.task_id.clone(),
            replica,
            invocation,
            resource,
            start: started,
            end: now,
            nominal: j.nominal,
            outcome,
            good,
            energy_rate_w: rate,
        });
    }

    // ── Completion ──────────────────────────────────────────────────────

    fn on_invocation_complete(&mut self, job: u32, replica: u32, token: u64) {
        let current = self.jobs[job as usize].replicas[replica as usize].phase;
        match current {
            ReplicaPhase::Running { token: t, .. } if t == token => {}
            _ => return, // overtaken by an eviction or cancellation
        }
        let first_win = !self.jobs[job as usize].completed;
        self.close_invocation(job, replica, InvocationOutcome::Completed, first_win);
        if !first_win {
            self.request_dispatch();
            return;
        }
        self.jobs[job as usize].completed = true;

        // Losing siblings are of no further use: running ones stop now,
        // queued ones never start and consume nothing.
        let sibling_count = self.jobs[job as usize].replicas.len() as u32;
        for sib in 0..sibling_count {
            if sib == replica {
                continue;
            }
            match self.jobs[job as usize].replicas[sib as usize].phase {
                ReplicaPhase::Running { .. } => {
                    self.close_invocation(job, sib, InvocationOutcome::Cancelled, false);
                    self.stats.cancelled_running += 1;
                }
                ReplicaPhase::Queued => {
                    self.jobs[job as usize].replicas[sib as usize].phase = ReplicaPhase::Closed;
                    self.queue.retain(|&(jj, rr)| !(jj == job && rr == sib));
                    self.stats.cancelled_queued += 1;
                }
                ReplicaPhase::Closed => {}
            }
        }

        match self.jobs[job as usize].origin {
            Origin::Background { .. } => {
                self.stats.background_completed += 1;
            }
            Origin::Workflow { wf, task } => self.on_workflow_task_complete(job, wf, task),
        }
        self.request_dispatch();
    }

    fn on_workflow_task_complete(&mut self, job: u32, wf: u32, task: TaskIndex) {
        // All of the task's invocations are closed now, so the realised
        // bad energy — and with it the reward — is known.
        let now = self.now;
        let signal = {
            let j = &self.jobs[job as usize];
            match &j.decision {
                Some(d) if d.state.is_some() => {
                    let span = (now - j.first_submit) as f64;
                    let succeeded = span <= (1.0 + d.phi) * j.estimated as f64;
                    let sigma = if j.estimated > 0 {
                        compute_sigma(
                            j.bad_ws / report::WATT_SECONDS_PER_WATT_HOUR,
                            d.action,
                            j.estimated as f64 / 3_600.0,
                            self.config.xi_watts(),
                        )
                    } else if j.bad_ws > 0.0 {
                        1.0
                    } else {
                        0.0
                    };
                    Some((d.state.unwrap(), d.action, succeeded, sigma, d.record))
                }
                _ => None,
            }
        };
        if let Some((state, action, succeeded, sigma, record)) = signal {
            if let Some(sig) = self.policy.observe(state, action, succeeded, sigma) {
                self.decisions[record].reward = Some(sig.value);
            }
        }

        let run = &mut self.workflows[wf as usize];
        run.completed.insert(task);
        let done = !run.done
            && run.spec.tasks[run.spec.end]
                .predecessors
                .iter()
                .all(|p| run.completed.contains(p));
        if done {
            run.done = true;
            run.completion_time = Some(now);
            self.stats.workflows_completed += 1;
        } else {
            self.schedule_ready_tasks(wf);
        }
    }

    // ── Eviction ────────────────────────────────────────────────────────

    /// Primary-user login or reboot start: any running invocation ends now
    /// and its replica relaunches from scratch at the back of the queue.
    fn evict(&mut self, resource: u32) {
        if let Some((job, replica)) = self.resources[resource as usize].running {
            self.close_invocation(job, replica, InvocationOutcome::Evicted, false);
            self.jobs[job as usize].replicas[replica as usize].phase = ReplicaPhase::Queued;
            self.queue.push_back((job, replica));
            self.stats.evictions += 1;
        }
    }

    fn on_login(&mut self, resource: u32, logout: Timestamp) {
        let now = self.now;
        self.resources[resource as usize].accrue(now);
        self.resources[resource as usize].sessions += 1;
        self.evict(resource);
        self.events.push(logout.max(now), EventKind::InteractiveLogout { resource });
        self.request_dispatch();
    }

    fn on_logout(&mut self, resource: u32) {
        let now = self.now;
        let res = &mut self.resources[resource as usize];
        res.accrue(now);
        res.sessions = res.sessions.saturating_sub(1);
        self.request_dispatch();
    }

    fn on_reboot(&mut self) {
        let now = self.now;
        let until = now + self.config.reboot.duration_s as i64;
        for id in 0..self.resources.len() as u32 {
            self.resources[id as usize].accrue(now);
            self.evict(id);
            self.resources[id as usize].reboot_until = until;
        }
        // Resources come back together; one dispatch covers them all.
        self.events.push(until, EventKind::QueueDispatch);
    }

    // ── Finalisation ────────────────────────────────────────────────────

    fn finalize(mut self) -> SimulationReport {
        let horizon = self.config.horizon_s();
        self.now = horizon;
        for resource in 0..self.resources.len() as u32 {
            if let Some((job, replica)) = self.resources[resource as usize].running {
                self.close_invocation(job, replica, InvocationOutcome::Cancelled, false);
            }
            self.resources[resource as usize].accrue(horizon);
        }
        self.queue.clear();

        let mut outcomes = Vec::with_capacity(self.workflows.len());
        for run in &self.workflows {
            if !run.done {
                self.stats.workflows_pending_at_horizon += 1;
            }
            let excess = run
                .completion_time
                .and_then(|c| workflow::excess_proportion(c, run.spec.submit_time, run.cr_est).ok());
            outcomes.push(WorkflowOutcome {
                workflow_id: run.spec.id.clone(),
                submit_time: run.spec.submit_time,
                completion_time: run.completion_time,
                critical_path: run.cr_est,
                excess,
            });
        }
        self.stats.horizon_exceeded_with_pending_work = self.stats.workflows_pending_at_horizon > 0
            || self.stats.background_completed < self.stats.background_submitted;

        let mut ledger = EnergyLedger::default();
        for j in &self.jobs {
            match j.origin {
                Origin::Workflow { .. } => {
                    ledger.workflow_good_ws += j.good_ws;
                    ledger.workflow_bad_ws += j.bad_ws;
                }
                Origin::Background { .. } => {
                    ledger.background_good_ws += j.good_ws;
                    ledger.background_bad_ws += j.bad_ws;
                }
            }
            ledger.tasks.push(TaskEnergy {
                workflow_id: j.workflow_id.clone(),
                task_id: j.task_id.clone(),
                good_ws: j.good_ws,
                bad_ws: j.bad_ws,
            });
        }
        for r in &self.resources {
            ledger.idle_ws += r.idle_ws;
        }

        SimulationReport {
            outcomes,
            invocations: self.invocations,
            decisions: self.decisions,
            ledger,
            stats: self.stats,
        }
    }
}
