//! Workflow DAG model: validation and S/T augmentation, critical paths,
//! deadlines, excess proportions and the per-task contingency values that
//! drive replication decisions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{Seconds, Timestamp};

pub mod parse;

/// Reserved id of the synthetic zero-duration start node.
pub const SYNTH_START: &str = "__start__";
/// Reserved id of the synthetic zero-duration end node.
pub const SYNTH_END: &str = "__end__";

#[derive(Debug, Error)]
pub enum WorkflowError {
    #[error("workflow has no tasks")]
    EmptyWorkflow,
    #[error("cycle detected involving task `{0}`")]
    CycleDetected(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("duplicate task id `{0}`")]
    DuplicateTask(String),
    #[error("task id `{0}` is reserved for synthetic nodes")]
    ReservedTaskId(String),
    #[error("critical path has zero duration")]
    ZeroCriticalPath,
    #[error("local critical path has zero duration")]
    ZeroLocalPath,
    #[error("task has zero estimated duration")]
    ZeroEstimate,
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("failed to read workflow file")]
    Io(#[from] std::io::Error),
}

/// Index of a task within its workflow's task table.
pub type TaskIndex = usize;

/// One node of the DAG. `estimated` is e_t, `actual` is r_t; the synthetic
/// start/end nodes carry zero for both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    pub estimated: Seconds,
    pub actual: Seconds,
    pub predecessors: Vec<TaskIndex>,
    pub successors: Vec<TaskIndex>,
    /// Scheduling latency of each incoming edge, parallel to `predecessors`.
    /// Accepted from input files but not charged per-edge by the engine,
    /// which applies a single per-submission latency instead.
    pub pred_latency: Vec<Seconds>,
}

impl TaskSpec {
    pub fn is_synthetic(&self) -> bool {
        self.id == SYNTH_START || self.id == SYNTH_END
    }
}

/// A validated, augmented workflow: acyclic, with exactly one synthetic
/// start node and one synthetic end node. Treated as immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowSpec {
    pub id: String,
    pub tasks: Vec<TaskSpec>,
    pub start: TaskIndex,
    pub end: TaskIndex,
    /// Topological order over all nodes, start first.
    pub topo: Vec<TaskIndex>,
    /// s(W); assigned when the workflow enters the system.
    pub submit_time: Timestamp,
    /// The user's contingency proportion φ.
    pub contingency: f64,
}

impl WorkflowSpec {
    /// Number of real (non-synthetic) tasks.
    pub fn real_task_count(&self) -> usize {
        self.tasks.len() - 2
    }

    pub fn task_by_id(&self, id: &str) -> Option<TaskIndex> {
        self.tasks.iter().position(|t| t.id == id)
    }
}

/// Task description before S/T augmentation. Predecessors are referenced
/// by id and may carry an optional edge latency in seconds.
#[derive(Debug, Clone, Default)]
pub struct RawTask {
    pub id: String,
    pub estimated: Seconds,
    pub actual: Seconds,
    pub predecessors: Vec<(String, Seconds)>,
}

#[derive(Debug, Clone, Default)]
pub struct RawDag {
    pub tasks: Vec<RawTask>,
}

/// Which duration column drives a path computation: r_t or e_t.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DurationSource {
    Actual,
    Estimated,
}

/// Per-workflow result record. `excess` is p(W); it is `None` while the
/// workflow is incomplete or when the critical path is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowOutcome {
    pub workflow_id: String,
    pub submit_time: Timestamp,
    pub completion_time: Option<Timestamp>,
    /// CR(W) over estimated durations, fixed at submission.
    pub critical_path: Seconds,
    pub excess: Option<f64>,
}

impl WorkflowOutcome {
    pub fn completed(&self) -> bool {
        self.completion_time.is_some()
    }

    /// Whether the workflow finished with p(W) ≤ `p`. Incomplete workflows
    /// never succeed.
    pub fn succeeded_within(&self, p: f64) -> bool {
        self.excess.map_or(false, |e| e <= p)
    }
}

/// Contingency figures for one task at its submission instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContingencySnapshot {
    pub task_id: String,
    /// Workflow deadline d (fractional seconds since epoch).
    pub deadline: f64,
    /// L′_t over estimates.
    pub local_path: Seconds,
    /// φ′: remaining slack balanced over the whole downstream path.
    pub phi_balanced: f64,
    /// φ″: all remaining slack assigned to this task alone.
    pub phi_current: f64,
}

/// Validates a raw DAG and wraps it with synthetic start/end nodes.
///
/// The synthetic wrapper is applied unconditionally, so single-rooted
/// inputs still gain a fresh S and T; this keeps every downstream
/// computation uniform. Fails on empty input, duplicate or reserved ids,
/// unknown predecessor references, and cycles.
pub fn augment_and_validate(
    raw: RawDag,
    workflow_id: impl Into<String>,
    contingency: f64,
) -> Result<WorkflowSpec, WorkflowError> {
    if raw.tasks.is_empty() {
        return Err(WorkflowError::EmptyWorkflow);
    }

    let n = raw.tasks.len();
    let mut index: BTreeMap<&str, TaskIndex> = BTreeMap::new();
    for (i, t) in raw.tasks.iter().enumerate() {
        if t.id == SYNTH_START || t.id == SYNTH_END {
            return Err(WorkflowError::ReservedTaskId(t.id.clone()));
        }
        if index.insert(t.id.as_str(), i).is_some() {
            return Err(WorkflowError::DuplicateTask(t.id.clone()));
        }
    }

    let mut tasks: Vec<TaskSpec> = raw
        .tasks
        .iter()
        .map(|t| TaskSpec {
            id: t.id.clone(),
            estimated: t.estimated,
            actual: t.actual,
            predecessors: Vec::new(),
            successors: Vec::new(),
            pred_latency: Vec::new(),
        })
        .collect();

    for (i, t) in raw.tasks.iter().enumerate() {
        for (pred_id, latency) in &t.predecessors {
            let p = *index
                .get(pred_id.as_str())
                .ok_or_else(|| WorkflowError::UnknownTask(pred_id.clone()))?;
            tasks[i].predecessors.push(p);
            tasks[i].pred_latency.push(*latency);
            tasks[p].successors.push(i);
        }
    }

    // Kahn's algorithm over the raw graph; anything left over sits on a cycle.
    let mut indegree: Vec<usize> = tasks.iter().map(|t| t.predecessors.len()).collect();
    let mut frontier: Vec<TaskIndex> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order: Vec<TaskIndex> = Vec::with_capacity(n);
    while let Some(t) = frontier.pop() {
        order.push(t);
        for &s in &tasks[t].successors {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                frontier.push(s);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap();
        return Err(WorkflowError::CycleDetected(tasks[stuck].id.clone()));
    }

    let start = n;
    let end = n + 1;
    let roots: Vec<TaskIndex> = (0..n).filter(|&i| tasks[i].predecessors.is_empty()).collect();
    let leaves: Vec<TaskIndex> = (0..n).filter(|&i| tasks[i].successors.is_empty()).collect();

    tasks.push(TaskSpec {
        id: SYNTH_START.to_string(),
        estimated: 0,
        actual: 0,
        predecessors: Vec::new(),
        successors: roots.clone(),
        pred_latency: Vec::new(),
    });
    tasks.push(TaskSpec {
        id: SYNTH_END.to_string(),
        estimated: 0,
        actual: 0,
        predecessors: leaves.clone(),
        successors: Vec::new(),
        pred_latency: vec![0; leaves.len()],
    });
    for r in roots {
        tasks[r].predecessors.push(start);
        tasks[r].pred_latency.push(0);
    }
    for l in leaves {
        tasks[l].successors.push(end);
    }

    let mut topo = Vec::with_capacity(n + 2);
    topo.push(start);
    // Kahn's order above covers the real tasks; re-derive deterministically
    // by repeated minimum so the stored order is independent of pop order.
    let mut indeg: Vec<usize> = tasks.iter().map(|t| t.predecessors.len()).collect();
    let mut ready: BTreeSet<TaskIndex> = BTreeSet::new();
    for &s in &tasks[start].successors {
        indeg[s] -= 1;
        if indeg[s] == 0 {
            ready.insert(s);
        }
    }
    while let Some(&t) = ready.iter().next() {
        ready.remove(&t);
        topo.push(t);
        for &s in &tasks[t].successors {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.insert(s);
            }
        }
    }
    debug_assert_eq!(topo.len(), tasks.len());

    Ok(WorkflowSpec {
        id: workflow_id.into(),
        tasks,
        start,
        end,
        topo,
        submit_time: 0,
        contingency,
    })
}

fn duration_of(task: &TaskSpec, source: DurationSource) -> Seconds {
    match source {
        DurationSource::Actual => task.actual,
        DurationSource::Estimated => task.estimated,
    }
}

/// L_t (or L′_t) for every node in one pass:
/// L_t = dur(t) + max over children of L_child, with L = dur at the sink.
pub fn all_local_paths(wf: &WorkflowSpec, source: DurationSource) -> Vec<Seconds> {
    let mut l = vec![0u64; wf.tasks.len()];
    for &t in wf.topo.iter().rev() {
        let longest_child = wf.tasks[t]
            .successors
            .iter()
            .map(|&c| l[c])
            .max()
            .unwrap_or(0);
        l[t] = duration_of(&wf.tasks[t], source) + longest_child;
    }
    l
}

/// Critical path duration of the whole workflow: L at the start node,
/// which equals CR(W) when `source` is the actual durations.
pub fn critical_path(wf: &WorkflowSpec, source: DurationSource) -> Seconds {
    all_local_paths(wf, source)[wf.start]
}

/// L′_t: the longest path from `task` to the end of the workflow.
pub fn local_critical_path(
    wf: &WorkflowSpec,
    task: TaskIndex,
    source: DurationSource,
) -> Result<Seconds, WorkflowError> {
    if task >= wf.tasks.len() {
        return Err(WorkflowError::UnknownTask(format!("#{task}")));
    }
    Ok(all_local_paths(wf, source)[task])
}

/// Longest local path among the children of `task` (zero when the only
/// child is the sink).
pub fn max_child_local_path(
    wf: &WorkflowSpec,
    task: TaskIndex,
    source: DurationSource,
) -> Result<Seconds, WorkflowError> {
    if task >= wf.tasks.len() {
        return Err(WorkflowError::UnknownTask(format!("#{task}")));
    }
    let l = all_local_paths(wf, source);
    Ok(wf.tasks[task]
        .successors
        .iter()
        .map(|&c| l[c])
        .max()
        .unwrap_or(0))
}

/// p(W) = (c − s)/CR − 1.
pub fn excess_proportion(
    completion: Timestamp,
    submit: Timestamp,
    critical: Seconds,
) -> Result<f64, WorkflowError> {
    if critical == 0 {
        return Err(WorkflowError::ZeroCriticalPath);
    }
    Ok((completion - submit) as f64 / critical as f64 - 1.0)
}

/// Workflow deadline d = (φ+1)·CR(W) + s(W). Fractional seconds: rounding
/// to whole seconds here would perturb φ′ at the twelfth decimal.
pub fn deadline(submit: Timestamp, contingency: f64, critical_estimated: Seconds) -> f64 {
    submit as f64 + (1.0 + contingency) * critical_estimated as f64
}

/// φ′ = (d − s_t)/L′_t − 1: the slack proportion shared by every task on
/// the local path from t.
pub fn contingency_balanced(
    deadline: f64,
    task_submit: Timestamp,
    local_path: Seconds,
) -> Result<f64, WorkflowError> {
    if local_path == 0 {
        return Err(WorkflowError::ZeroLocalPath);
    }
    Ok((deadline - task_submit as f64) / local_path as f64 - 1.0)
}

/// φ″ = (d − s_t − max_child_L′)/e_t − 1: every downstream task keeps its
/// own proportion, the current task absorbs the rest.
pub fn contingency_current(
    deadline: f64,
    task_submit: Timestamp,
    estimated: Seconds,
    max_child_local: Seconds,
) -> Result<f64, WorkflowError> {
    if estimated == 0 {
        return Err(WorkflowError::ZeroEstimate);
    }
    Ok((deadline - task_submit as f64 - max_child_local as f64) / estimated as f64 - 1.0)
}

/// Real tasks whose predecessors have all completed and which are not
/// themselves completed. The synthetic start counts as completed from
/// submission; the synthetic end is never returned. The caller is
/// responsible for excluding tasks it has already submitted.
pub fn ready_tasks(wf: &WorkflowSpec, completed: &BTreeSet<TaskIndex>) -> Vec<TaskIndex> {
    (0..wf.tasks.len())
        .filter(|&t| t != wf.start && t != wf.end)
        .filter(|t| !completed.contains(t))
        .filter(|&t| wf.tasks[t].predecessors.iter().all(|p| completed.contains(p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(tasks: &[(&str, u64, &[&str])]) -> RawDag {
        RawDag {
            tasks: tasks
                .iter()
                .map(|(id, minutes, preds)| RawTask {
                    id: id.to_string(),
                    estimated: minutes * 60,
                    actual: minutes * 60,
                    predecessors: preds.iter().map(|p| (p.to_string(), 0)).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn augments_disconnected_chains() {
        let wf = augment_and_validate(
            raw(&[("A", 1, &[]), ("B", 1, &["A"]), ("C", 1, &[]), ("D", 1, &["C"])]),
            "w",
            0.0,
        )
        .unwrap();
        let s = &wf.tasks[wf.start];
        let t = &wf.tasks[wf.end];
        assert_eq!(s.estimated, 0);
        assert_eq!(t.actual, 0);
        let mut start_children: Vec<&str> =
            s.successors.iter().map(|&c| wf.tasks[c].id.as_str()).collect();
        start_children.sort();
        assert_eq!(start_children, ["A", "C"]);
        let mut end_parents: Vec<&str> =
            t.predecessors.iter().map(|&p| wf.tasks[p].id.as_str()).collect();
        end_parents.sort();
        assert_eq!(end_parents, ["B", "D"]);
    }

    #[test]
    fn single_rooted_chain_still_gains_wrapper() {
        // A zero-duration user task named like a start node is still wrapped.
        let dag = RawDag {
            tasks: vec![
                RawTask { id: "root".into(), estimated: 0, actual: 0, predecessors: vec![] },
                RawTask {
                    id: "A".into(),
                    estimated: 60,
                    actual: 60,
                    predecessors: vec![("root".into(), 0)],
                },
            ],
        };
        let wf = augment_and_validate(dag, "w", 0.0).unwrap();
        assert_eq!(wf.tasks.len(), 4);
        assert_eq!(wf.tasks[wf.start].successors.len(), 1);
        assert_eq!(wf.tasks[wf.tasks[wf.start].successors[0]].id, "root");
    }

    #[test]
    fn rejects_cycles_and_empties() {
        let err = augment_and_validate(raw(&[("A", 1, &["B"]), ("B", 1, &["A"])]), "w", 0.0);
        assert!(matches!(err, Err(WorkflowError::CycleDetected(_))));
        assert!(matches!(
            augment_and_validate(RawDag::default(), "w", 0.0),
            Err(WorkflowError::EmptyWorkflow)
        ));
    }

    #[test]
    fn rejects_duplicates_unknowns_and_reserved() {
        assert!(matches!(
            augment_and_validate(raw(&[("A", 1, &[]), ("A", 1, &[])]), "w", 0.0),
            Err(WorkflowError::DuplicateTask(_))
        ));
        assert!(matches!(
            augment_and_validate(raw(&[("A", 1, &["Z"])]), "w", 0.0),
            Err(WorkflowError::UnknownTask(_))
        ));
        assert!(matches!(
            augment_and_validate(raw(&[(SYNTH_START, 1, &[])]), "w", 0.0),
            Err(WorkflowError::ReservedTaskId(_))
        ));
    }

    #[test]
    fn critical_path_two_branches() {
        // S→A(10)→C(7)→T and S→B(5)→T, in seconds.
        let dag = RawDag {
            tasks: vec![
                RawTask { id: "A".into(), estimated: 10, actual: 10, predecessors: vec![] },
                RawTask { id: "B".into(), estimated: 5, actual: 5, predecessors: vec![] },
                RawTask {
                    id: "C".into(),
                    estimated: 7,
                    actual: 7,
                    predecessors: vec![("A".into(), 0)],
                },
            ],
        };
        let wf = augment_and_validate(dag, "w", 0.0).unwrap();
        assert_eq!(critical_path(&wf, DurationSource::Actual), 17);
        assert_eq!(critical_path(&wf, DurationSource::Estimated), 17);
    }

    #[test]
    fn critical_path_all_zero() {
        let wf = augment_and_validate(raw(&[("A", 0, &[]), ("B", 0, &["A"])]), "w", 0.0).unwrap();
        assert_eq!(critical_path(&wf, DurationSource::Actual), 0);
    }

    #[test]
    fn local_path_base_cases() {
        let dag = raw(&[("C", 0, &[])]);
        let mut dag = dag;
        dag.tasks[0].estimated = 7;
        dag.tasks[0].actual = 7;
        let wf = augment_and_validate(dag, "w", 0.0).unwrap();
        let c = wf.task_by_id("C").unwrap();
        assert_eq!(local_critical_path(&wf, wf.end, DurationSource::Actual).unwrap(), 0);
        assert_eq!(local_critical_path(&wf, c, DurationSource::Actual).unwrap(), 7);
        assert_eq!(
            local_critical_path(&wf, wf.start, DurationSource::Actual).unwrap(),
            critical_path(&wf, DurationSource::Actual)
        );
        assert!(matches!(
            local_critical_path(&wf, 99, DurationSource::Actual),
            Err(WorkflowError::UnknownTask(_))
        ));
    }

    #[test]
    fn excess_proportion_cases() {
        assert_eq!(excess_proportion(150, 50, 100).unwrap(), 0.0);
        assert_eq!(excess_proportion(250, 50, 100).unwrap(), 1.0);
        assert!(matches!(
            excess_proportion(10, 0, 0),
            Err(WorkflowError::ZeroCriticalPath)
        ));
        // The observed worst case from the motivating analysis.
        let cr = 10_000u64;
        let c = 181_113; // c − s = 18.1113 · CR
        let p = excess_proportion(c, 0, cr).unwrap();
        assert!((p - 17.1113).abs() < 1e-9, "p = {p}");
    }

    #[test]
    fn deadline_cases() {
        assert_eq!(deadline(50, 0.0, 100), 150.0);
        assert_eq!(deadline(0, 2.0, 100), 300.0);
        // Two 32-minute tasks in series, φ = 0.5.
        assert_eq!(deadline(1000, 0.5, 64 * 60), 6760.0);
    }

    #[test]
    fn contingency_balanced_cases() {
        assert_eq!(contingency_balanced(200.0, 50, 100).unwrap(), 0.5);
        assert_eq!(contingency_balanced(200.0, 150, 100).unwrap(), -0.5);
        assert!(matches!(
            contingency_balanced(200.0, 50, 0),
            Err(WorkflowError::ZeroLocalPath)
        ));
        // Start task with exact estimates: φ′ = φ.
        let phi = 0.3;
        let cr = 7680u64;
        let d = deadline(500, phi, cr);
        let p = contingency_balanced(d, 500, cr).unwrap();
        assert!((p - phi).abs() < 1e-12);
    }

    #[test]
    fn contingency_current_cases() {
        assert_eq!(contingency_current(200.0, 50, 40, 80).unwrap(), 0.75);
        assert_eq!(contingency_current(100.0, 0, 100, 0).unwrap(), 0.0);
        assert_eq!(contingency_current(100.0, 90, 10, 20).unwrap(), -2.0);
        assert!(matches!(
            contingency_current(100.0, 0, 0, 0),
            Err(WorkflowError::ZeroEstimate)
        ));
    }

    #[test]
    fn ready_tasks_respects_joins() {
        // F needs both C and D.
        let wf = augment_and_validate(
            raw(&[
                ("C", 1, &[]),
                ("D", 1, &[]),
                ("F", 1, &["C", "D"]),
            ]),
            "w",
            0.0,
        )
        .unwrap();
        let mut completed = BTreeSet::new();
        completed.insert(wf.start);
        let ready = ready_tasks(&wf, &completed);
        let ids: Vec<&str> = ready.iter().map(|&t| wf.tasks[t].id.as_str()).collect();
        assert_eq!(ids, ["C", "D"]);

        completed.insert(wf.task_by_id("C").unwrap());
        let ready = ready_tasks(&wf, &completed);
        let ids: Vec<&str> = ready.iter().map(|&t| wf.tasks[t].id.as_str()).collect();
        assert_eq!(ids, ["D"], "F must wait for both C and D");

        for t in 0..wf.tasks.len() {
            completed.insert(t);
        }
        assert!(ready_tasks(&wf, &completed).is_empty());
    }

    #[test]
    fn reaugmenting_adds_only_the_wrapper() {
        let wf = augment_and_validate(raw(&[("A", 1, &[]), ("B", 1, &["A"])]), "w", 0.0).unwrap();
        // Feed the augmented graph back in as raw tasks under fresh names.
        let back = RawDag {
            tasks: wf
                .tasks
                .iter()
                .enumerate()
                .map(|(i, t)| RawTask {
                    id: format!("n{i}"),
                    estimated: t.estimated,
                    actual: t.actual,
                    predecessors: t.predecessors.iter().map(|&p| (format!("n{p}"), 0)).collect(),
                })
                .collect(),
        };
        let wf2 = augment_and_validate(back, "w2", 0.0).unwrap();
        assert_eq!(wf2.tasks.len(), wf.tasks.len() + 2);
        assert_eq!(critical_path(&wf2, DurationSource::Actual), critical_path(&wf, DurationSource::Actual));
    }
}
