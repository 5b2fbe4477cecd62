//! Experiment orchestration: single runs with full file output, and
//! sweeps over (φ, policy, seed) grids with a merged comparison CSV.

use std::fs::File;
use std::io::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{
    derive_point_seed, fnv1a64, parse_policy_label, ExperimentConfig, PolicyConfig, SweepSpec,
    WorkloadSource,
};
use crate::metrics::{
    self, energy_summary, heatmap, p_cdf, success_counts, EnergySummary, LengthBins,
    SuccessSummary,
};
use crate::policy::{qtable_io, PolicyKind};
use crate::sim::{self, RunStats, Session, SimulationReport};
use crate::workload::{self, io as workload_io, WorkloadRow};

/// RNG stream ids carved out of the run seed.
const STREAM_INTERACTIVE: u64 = 1;
const STREAM_TASKS: u64 = 2;
const STREAM_INJECT: u64 = 3;

/// A finished simulation with everything needed to write outputs or
/// aggregate sweep rows.
pub struct ExecutedRun {
    pub report: SimulationReport,
    pub sessions: Vec<Session>,
    pub rows: Vec<WorkloadRow>,
    pub policy: PolicyKind,
    pub label: String,
    pub generated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub policy: String,
    pub phi: f64,
    pub seed: u64,
    pub config_hash: String,
    pub success: SuccessSummary,
    pub energy: EnergySummary,
    pub stats: RunStats,
}

impl RunSummary {
    /// The one-line report printed after a run.
    pub fn one_line(&self) -> String {
        let head = self
            .success
            .rows
            .first()
            .map(|r| format!("success@{}={}", r.p, r.count))
            .unwrap_or_default();
        format!(
            "policy={} phi={} seed={} workflows={} completed={} {} good={:.4} MWh bad={:.4} MWh",
            self.policy,
            self.phi,
            self.seed,
            self.stats.workflows_submitted,
            self.stats.workflows_completed,
            head,
            self.energy.good_wh / 1.0e6,
            self.energy.bad_wh / 1.0e6,
        )
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Builds the run inputs from the configured source.
fn build_inputs(cfg: &ExperimentConfig) -> Result<(Vec<Session>, Vec<WorkloadRow>, bool)> {
    match &cfg.workload {
        WorkloadSource::Generate(gen) => {
            let mut gen = gen.clone();
            gen.resource_count = cfg.cluster.resources;
            gen.horizon_days = cfg.cluster.horizon_days;
            let sessions =
                workload::gen_interactive(&gen, &mut stream_rng(cfg.seed, STREAM_INTERACTIVE));
            let tasks = workload::gen_tasks(&gen, &mut stream_rng(cfg.seed, STREAM_TASKS));
            let rows = workload::inject_workflows(
                &tasks,
                gen.workflow_fraction,
                &gen.template,
                cfg.phi,
                &mut stream_rng(cfg.seed, STREAM_INJECT),
            )?;
            Ok((sessions, rows, true))
        }
        WorkloadSource::Files { workload, interactive } => {
            let file = File::open(interactive)
                .with_context(|| format!("opening interactive trace {}", interactive.display()))?;
            let sessions = sim::parse_interactive_csv(file)
                .with_context(|| format!("parsing interactive trace {}", interactive.display()))?;
            let file = File::open(workload)
                .with_context(|| format!("opening workload trace {}", workload.display()))?;
            let rows = workload_io::read_workload_csv(file, cfg.phi)
                .with_context(|| format!("parsing workload trace {}", workload.display()))?;
            Ok((sessions, rows, false))
        }
    }
}

/// Runs one experiment in memory. For the bandit policy any configured
/// training epochs run first over the same workload, carrying the learned
/// table into the measured run.
pub fn execute(cfg: &ExperimentConfig) -> Result<ExecutedRun> {
    cfg.validate()?;
    let (sessions, rows, generated) = build_inputs(cfg)?;
    let mut policy = cfg.policy.build()?;
    if let PolicyConfig::Rl(rl) = &cfg.policy {
        for epoch in 0..rl.train_epochs {
            let mut bytes = cfg.seed.to_le_bytes().to_vec();
            bytes.extend_from_slice(b"train");
            bytes.extend_from_slice(&epoch.to_le_bytes());
            let epoch_seed = fnv1a64(&bytes);
            sim::run(&cfg.cluster, &sessions, &rows, &mut policy, cfg.balancing, epoch_seed)?;
        }
    }
    let report = sim::run(&cfg.cluster, &sessions, &rows, &mut policy, cfg.balancing, cfg.seed)?;
    Ok(ExecutedRun { report, sessions, rows, policy, label: cfg.policy.label(), generated })
}

fn write_invocations_csv(report: &SimulationReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "job", "workflow_id", "task_id", "replica", "invocation", "resource", "start", "end",
        "tau_s", "nominal_s", "outcome", "good", "energy_rate_w",
    ])?;
    for inv in &report.invocations {
        w.write_record(&[
            inv.job.to_string(),
            inv.workflow_id.clone().unwrap_or_default(),
            inv.task_id.clone(),
            inv.replica.to_string(),
            inv.invocation.to_string(),
            inv.resource.to_string(),
            inv.start.to_string(),
            inv.end.to_string(),
            inv.tau().to_string(),
            inv.nominal.to_string(),
            format!("{:?}", inv.outcome).to_lowercase(),
            (inv.good as u8).to_string(),
            inv.energy_rate_w.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_outcomes_csv(report: &SimulationReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["workflow_id", "submit_time", "completion_time", "critical_path_s", "excess"])?;
    for o in &report.outcomes {
        w.write_record(&[
            o.workflow_id.clone(),
            o.submit_time.to_string(),
            o.completion_time.map(|t| t.to_string()).unwrap_or_default(),
            o.critical_path.to_string(),
            o.excess.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_decisions_csv(report: &SimulationReport, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["time", "workflow_id", "task_id", "hour", "phi_bin", "phi", "action", "reward"])?;
    for d in &report.decisions {
        w.write_record(&[
            d.time.to_string(),
            d.workflow_id.clone(),
            d.task_id.clone(),
            d.hour.to_string(),
            d.phi_bin.map(|b| b.to_string()).unwrap_or_default(),
            d.phi.to_string(),
            d.action.to_string(),
            d.reward.map(|r| r.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs one experiment and writes the report JSON, metric CSVs, raw logs,
/// the Q table (bandit runs) and the generated traces into `out_dir`.
pub fn run_single(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let executed = execute(cfg)?;
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;

    let success = success_counts(&executed.report, &cfg.p_grid, executed.label.clone());
    let energy = energy_summary(&executed.report, executed.label.clone());
    let summary = RunSummary {
        policy: executed.label.clone(),
        phi: cfg.phi,
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
        success: success.clone(),
        energy: energy.clone(),
        stats: executed.report.stats.clone(),
    };

    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    std::fs::write(out.join("report.json"), json)?;

    metrics::write_success_csv(&[success], File::create(out.join("success.csv"))?)?;
    match p_cdf(&executed.report) {
        Ok(points) => metrics::write_cdf_csv(&points, File::create(out.join("cdf.csv"))?)?,
        Err(_) => metrics::write_cdf_csv(&[], File::create(out.join("cdf.csv"))?)?,
    }
    let cells = heatmap(&executed.report, LengthBins::default());
    metrics::write_heatmap_csv(&cells, File::create(out.join("heatmap.csv"))?)?;
    metrics::write_energy_csv(&[energy], File::create(out.join("energy.csv"))?)?;

    write_invocations_csv(&executed.report, &out.join("invocations.csv"))?;
    write_outcomes_csv(&executed.report, &out.join("outcomes.csv"))?;
    write_decisions_csv(&executed.report, &out.join("decisions.csv"))?;

    if let PolicyKind::Rl(rl) = &executed.policy {
        qtable_io::export_csv(&rl.table, File::create(out.join("qtable.csv"))?)?;
    }
    if executed.generated {
        let template = match &cfg.workload {
            WorkloadSource::Generate(gen) => gen.template.clone(),
            WorkloadSource::Files { .. } => unreachable!("generated implies generate source"),
        };
        workload_io::write_workload_csv(
            &executed.rows,
            &template,
            File::create(out.join("workload.csv"))?,
        )?;
        sim::write_interactive_csv(&executed.sessions, File::create(out.join("interactive.csv"))?)?;
    }
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub phi: f64,
    pub policy: String,
    pub balancing: String,
    pub seed: u64,
    pub p: f64,
    pub success_count: u64,
    pub total_workflows: u64,
    pub completed: u64,
    pub good_wh: f64,
    pub bad_wh: f64,
    pub idle_wh: f64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub failures: usize,
    pub rows: usize,
}

/// One run per (φ, policy, seed) grid point, parallel up to `workers`.
/// Failures are recorded in failures.csv and do not abort the sweep. The
/// point seed is derived from the base seed, φ and the sweep seed — not
/// the policy — so every policy sees an identical trace.
pub fn run_sweep(cfg: &ExperimentConfig, spec: &SweepSpec, workers: usize) -> Result<SweepSummary> {
    cfg.validate()?;
    let base_rl = match &cfg.policy {
        PolicyConfig::Rl(rl) => rl.clone(),
        _ => Default::default(),
    };
    let phis = if spec.phi.is_empty() { vec![cfg.phi] } else { spec.phi.clone() };
    let seeds = if spec.seeds.is_empty() { vec![cfg.seed] } else { spec.seeds.clone() };
    let policies: Vec<(String, PolicyConfig)> = if spec.policies.is_empty() {
        vec![(cfg.policy.label(), cfg.policy.clone())]
    } else {
        spec.policies
            .iter()
            .map(|label| Ok((label.clone(), parse_policy_label(label, &base_rl)?)))
            .collect::<Result<_>>()?
    };

    let mut points = Vec::new();
    for &phi in &phis {
        for (label, policy) in &policies {
            for &sweep_seed in &seeds {
                let mut point = cfg.clone();
                point.phi = phi;
                point.policy = policy.clone();
                point.seed = derive_point_seed(cfg.seed, phi, sweep_seed);
                points.push((label.clone(), sweep_seed, point));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .context("building sweep worker pool")?;
    let results: Vec<std::result::Result<Vec<SweepRow>, String>> = pool.install(|| {
        points
            .par_iter()
            .map(|(label, _sweep_seed, point)| {
                let executed = execute(point).map_err(|e| format!("{e:#}"))?;
                let success = success_counts(&executed.report, &point.p_grid, label.clone());
                let energy = energy_summary(&executed.report, label.clone());
                let hash = point.config_hash();
                Ok(success
                    .rows
                    .iter()
                    .map(|r| SweepRow {
                        phi: point.phi,
                        policy: label.clone(),
                        balancing: match point.balancing {
                            sim::BalancingMode::Balanced => "balanced".into(),
                            sim::BalancingMode::Current => "current".into(),
                        },
                        seed: point.seed,
                        p: r.p,
                        success_count: r.count,
                        total_workflows: success.total_workflows,
                        completed: executed.report.stats.workflows_completed,
                        good_wh: energy.good_wh,
                        bad_wh: energy.bad_wh,
                        idle_wh: energy.idle_wh,
                        config_hash: hash.clone(),
                    })
                    .collect())
            })
            .collect()
    });

    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating output directory {}", cfg.out_dir.display()))?;
    let mut sweep = csv::Writer::from_path(cfg.out_dir.join("sweep.csv"))?;
    sweep.write_record([
        "phi", "policy", "balancing", "seed", "p", "success_count", "total_workflows",
        "completed", "good_wh", "bad_wh", "idle_wh", "config_hash",
    ])?;
    let mut failures = csv::Writer::from_path(cfg.out_dir.join("failures.csv"))?;
    failures.write_record(["phi", "policy", "seed", "error"])?;

    let mut row_count = 0usize;
    let mut failure_count = 0usize;
    for ((label, sweep_seed, point), result) in points.iter().zip(results) {
        match result {
            Ok(rows) => {
                for row in rows {
                    row_count += 1;
                    sweep.write_record(&[
                        row.phi.to_string(),
                        row.policy.clone(),
                        row.balancing.clone(),
                        row.seed.to_string(),
                        row.p.to_string(),
                        row.success_count.to_string(),
                        row.total_workflows.to_string(),
                        row.completed.to_string(),
                        row.good_wh.to_string(),
                        row.bad_wh.to_string(),
                        row.idle_wh.to_string(),
                        row.config_hash.clone(),
                    ])?;
                }
            }
            Err(msg) => {
                failure_count += 1;
                failures.write_record(&[
                    point.phi.to_string(),
                    label.clone(),
                    sweep_seed.to_string(),
                    msg,
                ])?;
            }
        }
    }
    sweep.flush()?;
    failures.flush()?;
    let mut handle = File::create(cfg.out_dir.join("sweep_summary.json"))?;
    let summary = SweepSummary { runs: points.len(), failures: failure_count, rows: row_count };
    writeln!(handle, "{}", serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
