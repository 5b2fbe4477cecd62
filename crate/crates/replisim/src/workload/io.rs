//! Workload CSV: `kind,submit_time,duration_or_template,template_params`.
//!
//! Task rows carry their duration in seconds; workflow rows name a
//! template (`paper`, `montage`, `file`) plus its parameters. Parsing is
//! split from materialisation so row syntax can be checked without
//! touching the filesystem.

use std::io::{Read, Write};
use std::path::PathBuf;

use super::{
    instantiate_template, MontageParams, WorkflowTemplate, WorkloadError, WorkloadRow,
};
use crate::{Seconds, Timestamp};

/// A syntactically valid workload row before template instantiation.
#[derive(Debug, Clone, PartialEq)]
pub enum ParsedRow {
    Task { submit: Timestamp, duration: Seconds },
    Workflow { submit: Timestamp, template: WorkflowTemplate },
}

fn parse_montage_params(params: &str, line: usize) -> Result<MontageParams, WorkloadError> {
    let mut out = MontageParams::default();
    for part in params.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (key, value) = part.split_once('=').ok_or(WorkloadError::Malformed {
            line,
            msg: format!("expected key=value, got `{part}`"),
        })?;
        let parse = |v: &str| -> Result<f64, WorkloadError> {
            v.trim().parse().map_err(|_| WorkloadError::Malformed {
                line,
                msg: format!("invalid number `{v}`"),
            })
        };
        match key.trim() {
            "width" => {
                out.width = value.trim().parse().map_err(|_| WorkloadError::Malformed {
                    line,
                    msg: format!("invalid width `{value}`"),
                })?
            }
            "projection" => out.projection_minutes = parse(value)?,
            "background" => out.background_minutes = parse(value)?,
            "merge" => out.merge_minutes = parse(value)?,
            "add" => out.add_minutes = parse(value)?,
            "shrink" => out.shrink_minutes = parse(value)?,
            other => {
                return Err(WorkloadError::Malformed {
                    line,
                    msg: format!("unknown montage parameter `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Parses workload rows without instantiating anything.
pub fn parse_workload_rows<R: Read>(input: R) -> Result<Vec<ParsedRow>, WorkloadError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| WorkloadError::Malformed { line, msg: e.to_string() })?;
        if record.len() < 3 || record.len() > 4 {
            return Err(WorkloadError::Malformed {
                line,
                msg: format!("expected 3 or 4 fields, found {}", record.len()),
            });
        }
        let kind = record.get(0).unwrap_or("").trim();
        let submit: Timestamp = record.get(1).unwrap_or("").trim().parse().map_err(|_| {
            WorkloadError::Malformed { line, msg: "invalid submit_time".into() }
        })?;
        let third = record.get(2).unwrap_or("").trim();
        let params = record.get(3).unwrap_or("").trim();
        match kind {
            "task" => {
                let duration: Seconds = third.parse().map_err(|_| WorkloadError::Malformed {
                    line,
                    msg: format!("invalid duration `{third}`"),
                })?;
                rows.push(ParsedRow::Task { submit, duration });
            }
            "workflow" => {
                let template = match third {
                    "paper" => {
                        let task_minutes = if params.is_empty() {
                            32.0
                        } else {
                            params.parse().map_err(|_| WorkloadError::Malformed {
                                line,
                                msg: format!("invalid task minutes `{params}`"),
                            })?
                        };
                        WorkflowTemplate::Paper { task_minutes }
                    }
                    "montage" => WorkflowTemplate::Montage(parse_montage_params(params, line)?),
                    "file" => {
                        if params.is_empty() {
                            return Err(WorkloadError::Malformed {
                                line,
                                msg: "file template needs a path".into(),
                            });
                        }
                        WorkflowTemplate::File { path: PathBuf::from(params) }
                    }
                    other => {
                        return Err(WorkloadError::Malformed {
                            line,
                            msg: format!("unknown template `{other}`"),
                        })
                    }
                };
                rows.push(ParsedRow::Workflow { submit, template });
            }
            other => {
                return Err(WorkloadError::Malformed {
                    line,
                    msg: format!("unknown row kind `{other}`"),
                })
            }
        }
    }
    Ok(rows)
}

/// Instantiates parsed rows into engine-ready workload rows. Workflow ids
/// are assigned in row order.
pub fn materialize_rows(
    rows: Vec<ParsedRow>,
    contingency: f64,
) -> Result<Vec<WorkloadRow>, WorkloadError> {
    let mut out = Vec::with_capacity(rows.len());
    let mut serial = 0u32;
    for row in rows {
        match row {
            ParsedRow::Task { submit, duration } => {
                out.push(WorkloadRow::Task { submit, duration })
            }
            ParsedRow::Workflow { submit, template } => {
                let id = format!("wf-{serial:05}");
                serial += 1;
                let spec = instantiate_template(&template, id, contingency)?;
                out.push(WorkloadRow::Workflow { submit, spec });
            }
        }
    }
    Ok(out)
}

/// Reads and materialises a workload CSV in one step.
pub fn read_workload_csv<R: Read>(
    input: R,
    contingency: f64,
) -> Result<Vec<WorkloadRow>, WorkloadError> {
    materialize_rows(parse_workload_rows(input)?, contingency)
}

fn template_fields(template: &WorkflowTemplate) -> (String, String) {
    match template {
        WorkflowTemplate::Paper { task_minutes } => ("paper".into(), task_minutes.to_string()),
        WorkflowTemplate::Montage(p) => (
            "montage".into(),
            format!(
                "width={};projection={};background={};merge={};add={};shrink={}",
                p.width,
                p.projection_minutes,
                p.background_minutes,
                p.merge_minutes,
                p.add_minutes,
                p.shrink_minutes
            ),
        ),
        WorkflowTemplate::File { path } => ("file".into(), path.display().to_string()),
    }
}

/// Writes workload rows back out. Workflow rows are written against the
/// template that generated the workload.
pub fn write_workload_csv<W: Write>(
    rows: &[WorkloadRow],
    template: &WorkflowTemplate,
    out: W,
) -> Result<(), WorkloadError> {
    let mut w = csv::Writer::from_writer(out);
    let to_malformed = |e: csv::Error| WorkloadError::Malformed { line: 0, msg: e.to_string() };
    w.write_record(["kind", "submit_time", "duration_or_template", "template_params"])
        .map_err(to_malformed)?;
    let (name, params) = template_fields(template);
    for row in rows {
        match row {
            WorkloadRow::Task { submit, duration } => w
                .write_record(&["task".into(), submit.to_string(), duration.to_string(), String::new()])
                .map_err(to_malformed)?,
            WorkloadRow::Workflow { submit, .. } => w
                .write_record(&["workflow".into(), submit.to_string(), name.clone(), params.clone()])
                .map_err(to_malformed)?,
        }
    }
    w.flush().map_err(|e| WorkloadError::Malformed { line: 0, msg: e.to_string() })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_materialize_mixed_rows() {
        let text = "kind,submit_time,duration_or_template,template_params\n\
                    task,100,1800,\n\
                    workflow,200,paper,32\n\
                    workflow,300,montage,width=4\n";
        let rows = parse_workload_rows(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 3);
        let rows = materialize_rows(rows, 0.5).unwrap();
        match &rows[1] {
            WorkloadRow::Workflow { spec, .. } => {
                assert_eq!(spec.real_task_count(), 8);
                assert_eq!(spec.contingency, 0.5);
            }
            _ => panic!("expected a workflow row"),
        }
    }

    #[test]
    fn roundtrip_through_csv() {
        let template = WorkflowTemplate::default();
        let rows = vec![
            WorkloadRow::Task { submit: 5, duration: 60 },
            WorkloadRow::Workflow {
                submit: 9,
                spec: super::super::paper_workflow(32.0, "wf-00000", 0.1).unwrap(),
            },
        ];
        let mut buf = Vec::new();
        write_workload_csv(&rows, &template, &mut buf).unwrap();
        let back = read_workload_csv(buf.as_slice(), 0.1).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0], rows[0]);
        match (&back[1], &rows[1]) {
            (WorkloadRow::Workflow { spec: a, .. }, WorkloadRow::Workflow { spec: b, .. }) => {
                assert_eq!(a.id, b.id);
                assert_eq!(a.real_task_count(), b.real_task_count());
            }
            _ => panic!("expected workflow rows"),
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        let bad = "kind,submit_time,duration_or_template,template_params\nnope,1,2,\n";
        assert!(parse_workload_rows(bad.as_bytes()).is_err());
        let bad = "kind,submit_time,duration_or_template,template_params\ntask,x,2,\n";
        assert!(parse_workload_rows(bad.as_bytes()).is_err());
        let bad = "kind,submit_time,duration_or_template,template_params\nworkflow,1,file,\n";
        assert!(parse_workload_rows(bad.as_bytes()).is_err());
        let bad = "kind,submit_time,duration_or_template,template_params\nworkflow,1,montage,width=x\n";
        assert!(parse_workload_rows(bad.as_bytes()).is_err());
    }
}
