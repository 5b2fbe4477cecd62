//! Synthetic workload generation: interactive-user traces, background
//! task traces, workflow templates, and injection of workflows into a
//! task trace by random replacement.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::Session;
use crate::workflow::{augment_and_validate, RawDag, RawTask, WorkflowError, WorkflowSpec};
use crate::{Seconds, Timestamp, SECONDS_PER_DAY, SECONDS_PER_HOUR};

pub mod io;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("montage width must be at least 2, got {0}")]
    WidthTooSmall(u32),
    #[error("workflow template failed to build")]
    Template(#[from] WorkflowError),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("failed to read workload file")]
    Io(#[from] std::io::Error),
}

/// Relative intensity per hour of day. Zero everywhere means "never".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiurnalProfile(pub [f64; 24]);

impl DiurnalProfile {
    pub fn flat(value: f64) -> Self {
        DiurnalProfile([value; 24])
    }

    pub fn zero() -> Self {
        Self::flat(0.0)
    }

    pub fn intensity(&self, hour: u8) -> f64 {
        self.0[hour as usize]
    }

    pub fn max_intensity(&self) -> f64 {
        self.0.iter().cloned().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Draws an hour with probability proportional to its intensity.
    /// Returns `None` when the profile is identically zero.
    pub fn sample_hour(&self, rng: &mut impl Rng) -> Option<u8> {
        let total = self.total();
        if total <= 0.0 {
            return None;
        }
        let mut x = rng.gen::<f64>() * total;
        for (h, &w) in self.0.iter().enumerate() {
            x -= w;
            if x < 0.0 {
                return Some(h as u8);
            }
        }
        Some(23)
    }

    /// Quiet overnight, busy working hours, tailing off to midnight.
    /// Tuned so a day's completion heatmap shows the morning-friendly,
    /// reboot-scarred texture of a multi-use cluster.
    pub fn default_sessions() -> Self {
        let mut p = [0.05; 24];
        for h in 8..10 {
            p[h] = 0.15;
        }
        for h in 10..18 {
            p[h] = 0.35;
        }
        for h in 18..22 {
            p[h] = 0.15;
        }
        for h in 22..24 {
            p[h] = 0.08;
        }
        DiurnalProfile(p)
    }

    /// Task submissions skew towards working hours but never stop.
    pub fn default_submissions() -> Self {
        let mut p = [0.3; 24];
        for h in 9..18 {
            p[h] = 1.0;
        }
        for h in 18..23 {
            p[h] = 0.5;
        }
        DiurnalProfile(p)
    }
}

/// Shape of the workflows injected into the trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkflowTemplate {
    /// The canonical eight-task two-lane workflow, every task the same
    /// length.
    Paper { task_minutes: f64 },
    /// Layered astronomy-mosaic-style DAG: source → width projections →
    /// width background fits → merge → add → shrink → sink.
    Montage(MontageParams),
    /// Load a workflow definition file.
    File { path: std::path::PathBuf },
}

impl Default for WorkflowTemplate {
    fn default() -> Self {
        WorkflowTemplate::Paper { task_minutes: 32.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MontageParams {
    pub width: u32,
    pub projection_minutes: f64,
    pub background_minutes: f64,
    pub merge_minutes: f64,
    pub add_minutes: f64,
    pub shrink_minutes: f64,
}

impl Default for MontageParams {
    fn default() -> Self {
        MontageParams {
            width: 4,
            projection_minutes: 4.0,
            background_minutes: 2.0,
            merge_minutes: 4.0,
            add_minutes: 8.0,
            shrink_minutes: 2.0,
        }
    }
}

/// Everything the generators need. `resource_count` and `horizon_days`
/// normally mirror the cluster config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorkloadConfig {
    pub resource_count: u32,
    pub horizon_days: u32,
    pub task_count: u64,
    /// w: the fraction of trace tasks replaced by workflows.
    pub workflow_fraction: f64,
    pub template: WorkflowTemplate,
    pub task_duration_median_min: f64,
    pub task_duration_sigma: f64,
    pub submission_profile: DiurnalProfile,
    /// Expected primary-user logins per resource per hour, by hour.
    pub login_profile: DiurnalProfile,
    pub session_median_min: f64,
    pub session_sigma: f64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig {
            resource_count: 50,
            horizon_days: 7,
            task_count: 1_000,
            workflow_fraction: 0.1,
            template: WorkflowTemplate::default(),
            task_duration_median_min: 30.0,
            task_duration_sigma: 0.6,
            submission_profile: DiurnalProfile::default_submissions(),
            login_profile: DiurnalProfile::default_sessions(),
            session_median_min: 45.0,
            session_sigma: 0.7,
        }
    }
}

/// One row of the mixed workload fed to the engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WorkloadRow {
    Task { submit: Timestamp, duration: Seconds },
    Workflow { submit: Timestamp, spec: WorkflowSpec },
}

impl WorkloadRow {
    pub fn submit_time(&self) -> Timestamp {
        match self {
            WorkloadRow::Task { submit, .. } | WorkloadRow::Workflow { submit, .. } => *submit,
        }
    }
}

fn lognormal_seconds(median_min: f64, sigma: f64, rng: &mut impl Rng) -> Seconds {
    let dist = LogNormal::new((median_min * 60.0).max(1.0).ln(), sigma).expect("valid sigma");
    dist.sample(rng).round().max(1.0) as Seconds
}

/// Generates login/logout sessions per resource from the diurnal login
/// profile (non-homogeneous Poisson by thinning); session lengths are
/// log-normal. Sessions on one resource never overlap: the next login is
/// drawn from the previous logout. Output is sorted by login time.
pub fn gen_interactive(config: &WorkloadConfig, rng: &mut impl Rng) -> Vec<Session> {
    let horizon = config.horizon_days as i64 * SECONDS_PER_DAY;
    let lambda_max = config.login_profile.max_intensity();
    let mut sessions = Vec::new();
    if lambda_max <= 0.0 {
        return sessions;
    }
    let gap = Exp::new(lambda_max / SECONDS_PER_HOUR as f64).expect("positive rate");
    for resource in 0..config.resource_count {
        let mut t = 0.0f64;
        loop {
            t += gap.sample(rng);
            if t >= horizon as f64 {
                break;
            }
            let hour = ((t as i64).rem_euclid(SECONDS_PER_DAY) / SECONDS_PER_HOUR) as u8;
            if rng.gen::<f64>() >= config.login_profile.intensity(hour) / lambda_max {
                continue;
            }
            let login = t as Timestamp;
            let length = lognormal_seconds(config.session_median_min, config.session_sigma, rng);
            let logout = (login + length as i64).min(horizon);
            sessions.push(Session { resource, login, logout });
            t = logout as f64;
            if logout >= horizon {
                break;
            }
        }
    }
    sessions.sort_by_key(|s| (s.login, s.resource));
    sessions
}

/// Generates exactly `task_count` background tasks with arrival times
/// drawn from the submission profile and log-normal durations. Returns an
/// empty trace when the profile is identically zero.
pub fn gen_tasks(config: &WorkloadConfig, rng: &mut impl Rng) -> Vec<WorkloadRow> {
    if config.task_count == 0 || config.submission_profile.total() <= 0.0 {
        return Vec::new();
    }
    let mut rows: Vec<WorkloadRow> = (0..config.task_count)
        .map(|_| {
            let day = rng.gen_range(0..config.horizon_days.max(1)) as i64;
            let hour = config.submission_profile.sample_hour(rng).unwrap() as i64;
            let second = rng.gen_range(0..SECONDS_PER_HOUR);
            let submit = day * SECONDS_PER_DAY + hour * SECONDS_PER_HOUR + second;
            let duration =
                lognormal_seconds(config.task_duration_median_min, config.task_duration_sigma, rng);
            WorkloadRow::Task { submit, duration }
        })
        .collect();
    rows.sort_by_key(|r| r.submit_time());
    rows
}

/// Builds the canonical eight-task workflow: S→{A,B}, A→C, B→D, {C,D}→F,
/// C→E, D→G, {E,F,G}→H, H→T. Estimates equal actuals.
pub fn paper_workflow(
    task_minutes: f64,
    workflow_id: impl Into<String>,
    contingency: f64,
) -> Result<WorkflowSpec, WorkloadError> {
    let d = (task_minutes * 60.0).round().max(0.0) as Seconds;
    let task = |id: &str, preds: &[&str]| RawTask {
        id: id.to_string(),
        estimated: d,
        actual: d,
        predecessors: preds.iter().map(|p| (p.to_string(), 0)).collect(),
    };
    let raw = RawDag {
        tasks: vec![
            task("A", &[]),
            task("B", &[]),
            task("C", &["A"]),
            task("D", &["B"]),
            task("E", &["C"]),
            task("F", &["C", "D"]),
            task("G", &["D"]),
            task("H", &["E", "F", "G"]),
        ],
    };
    Ok(augment_and_validate(raw, workflow_id, contingency)?)
}

/// Builds the layered mosaic-style DAG. With width w the workflow has
/// 2w+3 real tasks plus the synthetic wrapper.
pub fn montage_like(
    params: &MontageParams,
    workflow_id: impl Into<String>,
    contingency: f64,
) -> Result<WorkflowSpec, WorkloadError> {
    if params.width < 2 {
        return Err(WorkloadError::WidthTooSmall(params.width));
    }
    let minutes = |m: f64| (m * 60.0).round().max(0.0) as Seconds;
    let mut tasks = Vec::new();
    let mut push = |id: String, minutes: Seconds, preds: Vec<String>| {
        tasks.push(RawTask {
            id,
            estimated: minutes,
            actual: minutes,
            predecessors: preds.into_iter().map(|p| (p, 0)).collect(),
        });
    };
    let proj = minutes(params.projection_minutes);
    let bg = minutes(params.background_minutes);
    for i in 0..params.width {
        push(format!("project-{i:02}"), proj, vec![]);
    }
    for i in 0..params.width {
        push(format!("bgfit-{i:02}"), bg, vec![format!("project-{i:02}")]);
    }
    let merge_preds: Vec<String> = (0..params.width).map(|i| format!("bgfit-{i:02}")).collect();
    push("merge".into(), minutes(params.merge_minutes), merge_preds);
    push("add".into(), minutes(params.add_minutes), vec!["merge".into()]);
    push("shrink".into(), minutes(params.shrink_minutes), vec!["add".into()]);
    Ok(augment_and_validate(RawDag { tasks }, workflow_id, contingency)?)
}

/// Instantiates a template as a fresh workflow spec.
pub fn instantiate_template(
    template: &WorkflowTemplate,
    workflow_id: impl Into<String>,
    contingency: f64,
) -> Result<WorkflowSpec, WorkloadError> {
    match template {
        WorkflowTemplate::Paper { task_minutes } => {
            paper_workflow(*task_minutes, workflow_id, contingency)
        }
        WorkflowTemplate::Montage(params) => montage_like(params, workflow_id, contingency),
        WorkflowTemplate::File { path } => {
            Ok(crate::workflow::parse::load_workflow_file(path, workflow_id, contingency)?)
        }
    }
}

/// Replaces floor(w·rows) uniformly chosen task rows with workflows at
/// the same submit times. Untouched rows pass through unchanged.
pub fn inject_workflows(
    rows: &[WorkloadRow],
    workflow_fraction: f64,
    template: &WorkflowTemplate,
    contingency: f64,
    rng: &mut impl Rng,
) -> Result<Vec<WorkloadRow>, WorkloadError> {
    assert!((0.0..=1.0).contains(&workflow_fraction), "w must be a proportion");
    let replace = (workflow_fraction * rows.len() as f64).floor() as usize;
    let chosen: std::collections::BTreeSet<usize> =
        sample(rng, rows.len(), replace).into_iter().collect();
    let mut out = Vec::with_capacity(rows.len());
    let mut serial = 0u32;
    for (i, row) in rows.iter().enumerate() {
        if chosen.contains(&i) {
            let id = format!("wf-{serial:05}");
            serial += 1;
            let spec = instantiate_template(template, id, contingency)?;
            out.push(WorkloadRow::Workflow { submit: row.submit_time(), spec });
        } else {
            out.push(row.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::{critical_path, DurationSource};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> WorkloadConfig {
        WorkloadConfig { resource_count: 10, horizon_days: 2, ..WorkloadConfig::default() }
    }

    #[test]
    fn zero_intensity_profile_gives_empty_trace() {
        let mut config = cfg();
        config.login_profile = DiurnalProfile::zero();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(gen_interactive(&config, &mut rng).is_empty());
    }

    #[test]
    fn sessions_never_overlap_per_resource() {
        let config = cfg();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sessions = gen_interactive(&config, &mut rng);
            let mut last_logout = vec![i64::MIN; config.resource_count as usize];
            let mut by_resource: Vec<Vec<&Session>> =
                vec![Vec::new(); config.resource_count as usize];
            for s in &sessions {
                by_resource[s.resource as usize].push(s);
            }
            for list in by_resource {
                for s in list {
                    assert!(s.login >= last_logout[s.resource as usize]);
                    assert!(s.logout >= s.login);
                    last_logout[s.resource as usize] = s.logout;
                }
            }
        }
    }

    #[test]
    fn session_hours_concentrate_in_window() {
        // Intensity only between 10:00 and 18:00; short sessions. At least
        // 80% of generated session-time must land in the window.
        let mut config = cfg();
        config.resource_count = 200;
        config.horizon_days = 30;
        let mut p = [0.0; 24];
        for h in 10..18 {
            p[h] = 0.5;
        }
        config.login_profile = DiurnalProfile(p);
        config.session_median_min = 20.0;
        config.session_sigma = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sessions = gen_interactive(&config, &mut rng);
        assert!(sessions.len() > 10_000, "want a large sample, got {}", sessions.len());
        let mut inside = 0i64;
        let mut total = 0i64;
        for s in &sessions {
            for t in (s.login..s.logout).step_by(60) {
                let h = crate::hour_of_day(t);
                total += 1;
                if (10..18).contains(&h) {
                    inside += 1;
                }
            }
        }
        let frac = inside as f64 / total as f64;
        assert!(frac >= 0.8, "only {frac:.3} of session-time inside the window");
    }

    #[test]
    fn task_count_contract_and_sorted() {
        let mut config = cfg();
        config.task_count = 1000;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows = gen_tasks(&config, &mut rng);
        assert_eq!(rows.len(), 1000);
        assert!(rows.windows(2).all(|w| w[0].submit_time() <= w[1].submit_time()));
    }

    #[test]
    fn empty_when_rate_zero() {
        let mut config = cfg();
        config.submission_profile = DiurnalProfile::zero();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(gen_tasks(&config, &mut rng).is_empty());
        config.submission_profile = DiurnalProfile::default_submissions();
        config.task_count = 0;
        assert!(gen_tasks(&config, &mut rng).is_empty());
    }

    #[test]
    fn duration_median_tracks_parameter() {
        let mut config = cfg();
        config.task_count = 100_000;
        config.task_duration_median_min = 30.0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut durations: Vec<Seconds> = gen_tasks(&config, &mut rng)
            .iter()
            .map(|r| match r {
                WorkloadRow::Task { duration, .. } => *duration,
                _ => unreachable!(),
            })
            .collect();
        durations.sort_unstable();
        let median = durations[durations.len() / 2] as f64;
        let target = 30.0 * 60.0;
        assert!(
            (median - target).abs() / target < 0.05,
            "median {median}s vs target {target}s"
        );
    }

    #[test]
    fn injection_edge_fractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<WorkloadRow> =
            (0..100).map(|i| WorkloadRow::Task { submit: i * 10, duration: 60 }).collect();
        let template = WorkflowTemplate::default();

        let none = inject_workflows(&rows, 0.0, &template, 0.5, &mut rng).unwrap();
        assert_eq!(none, rows);

        let all = inject_workflows(&rows, 1.0, &template, 0.5, &mut rng).unwrap();
        assert!(all.iter().all(|r| matches!(r, WorkloadRow::Workflow { .. })));

        let tenth = inject_workflows(&rows, 0.1, &template, 0.5, &mut rng).unwrap();
        let workflows = tenth.iter().filter(|r| matches!(r, WorkloadRow::Workflow { .. })).count();
        assert_eq!(workflows, 10);
        assert_eq!(tenth.len(), rows.len());
        // Replacement keeps each row's submit time.
        for (a, b) in rows.iter().zip(&tenth) {
            assert_eq!(a.submit_time(), b.submit_time());
        }
    }

    #[test]
    fn floor_rule_on_uneven_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<WorkloadRow> =
            (0..15).map(|i| WorkloadRow::Task { submit: i, duration: 60 }).collect();
        let replaced = inject_workflows(&rows, 0.1, &WorkflowTemplate::default(), 0.5, &mut rng)
            .unwrap()
            .iter()
            .filter(|r| matches!(r, WorkloadRow::Workflow { .. }))
            .count();
        assert_eq!(replaced, 1, "floor(0.1 * 15) = 1");
    }

    #[test]
    fn paper_workflow_shape() {
        let wf = paper_workflow(32.0, "w", 0.5).unwrap();
        assert_eq!(wf.real_task_count(), 8);
        // Four 32-minute tasks on the longest chain.
        assert_eq!(critical_path(&wf, DurationSource::Actual), 4 * 32 * 60);
        let f = wf.task_by_id("F").unwrap();
        let mut preds: Vec<&str> =
            wf.tasks[f].predecessors.iter().map(|&p| wf.tasks[p].id.as_str()).collect();
        preds.sort();
        assert_eq!(preds, ["C", "D"]);
    }

    #[test]
    fn montage_structure() {
        let params = MontageParams { width: 16, ..MontageParams::default() };
        let wf = montage_like(&params, "m", 0.1).unwrap();
        assert_eq!(wf.tasks.len(), 37, "2w+3 real tasks plus S/T");
        let merge = wf.task_by_id("merge").unwrap();
        assert_eq!(wf.tasks[merge].predecessors.len(), 16);

        let narrow = MontageParams { width: 2, ..MontageParams::default() };
        let wf = montage_like(&narrow, "m", 0.1).unwrap();
        assert_eq!(wf.real_task_count(), 7);
        assert!(matches!(
            montage_like(&MontageParams { width: 1, ..MontageParams::default() }, "m", 0.1),
            Err(WorkloadError::WidthTooSmall(1))
        ));
    }

    #[test]
    fn generation_is_reproducible() {
        let config = cfg();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sessions = gen_interactive(&config, &mut rng);
            let tasks = gen_tasks(&config, &mut rng);
            let mixed = inject_workflows(&tasks, 0.1, &config.template, 0.5, &mut rng).unwrap();
            (sessions, mixed)
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }
}
