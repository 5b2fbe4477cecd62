//! Evaluation metrics over simulation reports: success counts against a
//! grid of contingency thresholds, the empirical CDF of p(W), the
//! per-invocation completion heatmap, and energy summaries. Each has a
//! CSV emitter.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{InvocationOutcome, SimulationReport};
use crate::{hour_of_day, Seconds};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("report contains no completed workflows")]
    EmptyReport,
    #[error("csv output failed")]
    Csv(#[from] csv::Error),
    #[error("io failed")]
    Io(#[from] std::io::Error),
}

/// Workflows with p(W) ≤ P for each P of the grid. Incomplete workflows
/// count towards the total but never towards a success count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessSummary {
    pub policy: String,
    pub total_workflows: u64,
    pub rows: Vec<SuccessRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRow {
    pub p: f64,
    pub count: u64,
}

impl SuccessSummary {
    pub fn count_at(&self, p: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.p == p).map(|r| r.count)
    }
}

pub fn success_counts(
    report: &SimulationReport,
    p_grid: &[f64],
    policy: impl Into<String>,
) -> SuccessSummary {
    let mut grid: Vec<f64> = p_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rows = grid
        .into_iter()
        .map(|p| SuccessRow {
            p,
            count: report.outcomes.iter().filter(|o| o.succeeded_within(p)).count() as u64,
        })
        .collect();
    SuccessSummary {
        policy: policy.into(),
        total_workflows: report.outcomes.len() as u64,
        rows,
    }
}

/// Empirical CDF of p(W) over completed workflows: one point per distinct
/// value, cumulative fraction ending at exactly 1.0.
pub fn p_cdf(report: &SimulationReport) -> Result<Vec<(f64, f64)>, MetricsError> {
    let mut values: Vec<f64> = report
        .completed_outcomes()
        .filter_map(|o| o.excess)
        .collect();
    if values.is_empty() {
        return Err(MetricsError::EmptyReport);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len() as f64;
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let fraction = (i + 1) as f64 / n;
        match points.last_mut() {
            Some(last) if last.0 == *v => last.1 = fraction,
            _ => points.push((*v, fraction)),
        }
    }
    Ok(points)
}

/// One heatmap cell: invocations of tasks in this length bin that started
/// in this hour, and the fraction that ran to completion. Cells without
/// samples are simply absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    /// Lower edge of the task-length bin, minutes.
    pub length_bin_min: u32,
    pub hour: u8,
    pub probability: f64,
    pub samples: u64,
}

/// Bin layout for the heatmap's task-length axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthBins {
    pub bin_minutes: u32,
    pub max_minutes: u32,
}

impl Default for LengthBins {
    fn default() -> Self {
        // 15-minute bins up to 8 hours; anything longer lands in the last.
        LengthBins { bin_minutes: 15, max_minutes: 480 }
    }
}

impl LengthBins {
    fn bin_of(&self, nominal: Seconds) -> u32 {
        let minutes = nominal / 60;
        let idx = (minutes as u32 / self.bin_minutes).min(self.max_minutes / self.bin_minutes - 1);
        idx * self.bin_minutes
    }
}

/// Completion probability of individual invocations by task length and
/// start hour. "Completion" means the invocation ran to its nominal end:
/// evictions and cancellations count against the cell.
pub fn heatmap(report: &SimulationReport, bins: LengthBins) -> Vec<HeatmapCell> {
    let mut counts: std::collections::BTreeMap<(u32, u8), (u64, u64)> =
        std::collections::BTreeMap::new();
    for inv in &report.invocations {
        let key = (bins.bin_of(inv.nominal), hour_of_day(inv.start));
        let entry = counts.entry(key).or_insert((0, 0));
        entry.1 += 1;
        if inv.outcome == InvocationOutcome::Completed {
            entry.0 += 1;
        }
    }
    counts
        .into_iter()
        .map(|((length_bin_min, hour), (ok, total))| HeatmapCell {
            length_bin_min,
            hour,
            probability: ok as f64 / total as f64,
            samples: total,
        })
        .collect()
}

/// Ledger totals for one run, in watt-hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub policy: String,
    pub good_wh: f64,
    pub bad_wh: f64,
    pub idle_wh: f64,
    pub background_wh: f64,
}

impl EnergySummary {
    pub fn total_replica_wh(&self) -> f64 {
        self.good_wh + self.bad_wh
    }

    pub fn bad_fraction(&self) -> f64 {
        let total = self.total_replica_wh();
        if total > 0.0 {
            self.bad_wh / total
        } else {
            0.0
        }
    }
}

pub fn energy_summary(report: &SimulationReport, policy: impl Into<String>) -> EnergySummary {
    EnergySummary {
        policy: policy.into(),
        good_wh: report.ledger.good_wh(),
        bad_wh: report.ledger.bad_wh(),
        idle_wh: report.ledger.idle_wh(),
        background_wh: report.ledger.background_wh(),
    }
}

/// Signed percentage differences of `b` relative to `a` (good, bad,
/// total); the comparison behind the fixed-vs-learned energy figures.
pub fn energy_delta_percent(a: &EnergySummary, b: &EnergySummary) -> (f64, f64, f64) {
    let pct = |x: f64, y: f64| if x != 0.0 { (y - x) / x * 100.0 } else { 0.0 };
    (
        pct(a.good_wh, b.good_wh),
        pct(a.bad_wh, b.bad_wh),
        pct(a.total_replica_wh(), b.total_replica_wh()),
    )
}

// ── CSV emitters ────────────────────────────────────────────────────────

pub fn write_success_csv<W: Write>(
    summaries: &[SuccessSummary],
    out: W,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["P", "count", "total", "policy"])?;
    for s in summaries {
        for row in &s.rows {
            w.write_record(&[
                row.p.to_string(),
                row.count.to_string(),
                s.total_workflows.to_string(),
                s.policy.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_cdf_csv<W: Write>(points: &[(f64, f64)], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "fraction"])?;
    for (p, fraction) in points {
        w.write_record(&[p.to_string(), fraction.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_heatmap_csv<W: Write>(cells: &[HeatmapCell], out: W) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["length_bin", "hour", "probability", "samples"])?;
    for c in cells {
        w.write_record(&[
            c.length_bin_min.to_string(),
            c.hour.to_string(),
            c.probability.to_string(),
            c.samples.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy_csv<W: Write>(
    summaries: &[EnergySummary],
    out: W,
) -> Result<(), MetricsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "good_wh", "bad_wh", "idle_wh"])?;
    for s in summaries {
        w.write_record(&[
            s.policy.clone(),
            s.good_wh.to_string(),
            s.bad_wh.to_string(),
            s.idle_wh.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{EnergyLedger, InvocationRecord, RunStats};
    use crate::workflow::WorkflowOutcome;

    fn report_with(outcomes: Vec<WorkflowOutcome>) -> SimulationReport {
        SimulationReport {
            outcomes,
            invocations: Vec::new(),
            decisions: Vec::new(),
            ledger: EnergyLedger::default(),
            stats: RunStats::default(),
        }
    }

    fn outcome(id: &str, excess: Option<f64>) -> WorkflowOutcome {
        WorkflowOutcome {
            workflow_id: id.into(),
            submit_time: 0,
            completion_time: excess.map(|_| 100),
            critical_path: 100,
            excess,
        }
    }

    #[test]
    fn success_counts_basics() {
        let report = report_with(vec![
            outcome("a", Some(0.0)),
            outcome("b", Some(0.0)),
            outcome("c", Some(0.0)),
        ]);
        let s = success_counts(&report, &[0.1], "single");
        assert_eq!(s.count_at(0.1), Some(3));
        assert_eq!(s.total_workflows, 3);

        let empty = report_with(vec![]);
        let s = success_counts(&empty, &[0.1, 0.5], "single");
        assert!(s.rows.iter().all(|r| r.count == 0));
    }

    #[test]
    fn success_counts_monotone_and_failure_handling() {
        let report = report_with(vec![
            outcome("a", Some(0.05)),
            outcome("b", Some(0.4)),
            outcome("c", Some(2.0)),
            outcome("pending", None),
        ]);
        let s = success_counts(&report, &[1.0, 0.1, 0.5, 3.0], "x");
        let counts: Vec<u64> = s.rows.iter().map(|r| r.count).collect();
        assert_eq!(counts, vec![1, 2, 2, 3]);
        assert!(s.rows.windows(2).all(|w| w[0].count <= w[1].count));
        assert_eq!(s.total_workflows, 4, "pending workflow still counts in the total");
    }

    #[test]
    fn cdf_steps() {
        let report = report_with(vec![outcome("a", Some(0.5))]);
        assert_eq!(p_cdf(&report).unwrap(), vec![(0.5, 1.0)]);

        let report = report_with(vec![
            outcome("a", Some(0.0)),
            outcome("b", Some(1.0)),
            outcome("c", Some(1.0)),
            outcome("d", Some(3.0)),
        ]);
        assert_eq!(p_cdf(&report).unwrap(), vec![(0.0, 0.25), (1.0, 0.75), (3.0, 1.0)]);

        assert!(matches!(p_cdf(&report_with(vec![])), Err(MetricsError::EmptyReport)));
        let pending_only = report_with(vec![outcome("p", None)]);
        assert!(p_cdf(&pending_only).is_err());
    }

    #[test]
    fn heatmap_cell_probability() {
        let mut report = report_with(vec![]);
        for i in 0..10 {
            report.invocations.push(InvocationRecord {
                job: i,
                workflow_id: None,
                task_id: format!("t{i}"),
                replica: 0,
                invocation: 1,
                resource: 0,
                start: 2 * 3600,
                end: 2 * 3600 + 600,
                nominal: 600,
                outcome: if i < 7 {
                    InvocationOutcome::Completed
                } else {
                    InvocationOutcome::Evicted
                },
                good: i < 7,
                energy_rate_w: 100.0,
            });
        }
        let cells = heatmap(&report, LengthBins::default());
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].hour, 2);
        assert_eq!(cells[0].length_bin_min, 0);
        assert_eq!(cells[0].samples, 10);
        assert!((cells[0].probability - 0.7).abs() < 1e-12);
    }

    #[test]
    fn heatmap_omits_empty_cells_and_clamps_length() {
        let mut report = report_with(vec![]);
        report.invocations.push(InvocationRecord {
            job: 0,
            workflow_id: None,
            task_id: "t".into(),
            replica: 0,
            invocation: 1,
            resource: 0,
            start: 0,
            end: 20 * 3600,
            nominal: 20 * 3600, // 20 h clamps into the last bin
            outcome: InvocationOutcome::Completed,
            good: true,
            energy_rate_w: 100.0,
        });
        let cells = heatmap(&report, LengthBins::default());
        assert_eq!(cells.len(), 1, "only cells with samples appear");
        assert_eq!(cells[0].length_bin_min, 465);
    }

    #[test]
    fn energy_summary_and_delta() {
        let mut report = report_with(vec![]);
        report.ledger.workflow_good_ws = 2.0e6 * 3600.0;
        report.ledger.workflow_bad_ws = 1.0e6 * 3600.0;
        let s = energy_summary(&report, "fixed:3");
        assert_eq!(s.total_replica_wh(), 3.0e6);
        assert!((s.bad_fraction() - 1.0 / 3.0).abs() < 1e-12);

        let (dg, db, dt) = energy_delta_percent(&s, &s);
        assert_eq!((dg, db, dt), (0.0, 0.0, 0.0));

        let mut cheaper = s.clone();
        cheaper.bad_wh = s.bad_wh / 2.0;
        let (_, db, _) = energy_delta_percent(&s, &cheaper);
        assert!((db + 50.0).abs() < 1e-9);
    }
}
