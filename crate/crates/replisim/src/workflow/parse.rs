//! Parser for workflow definition files.
//!
//! One task per line: `task_id,estimated_minutes,actual_minutes,preds`
//! where `preds` is a semicolon-separated predecessor list (empty for
//! roots) and each predecessor may carry an edge latency as
//! `pred:latency_seconds`. Blank lines and `#` comments are skipped.

use std::path::Path;

use super::{augment_and_validate, RawDag, RawTask, WorkflowError, WorkflowSpec};
use crate::Seconds;

fn minutes_to_seconds(field: &str, line: usize) -> Result<Seconds, WorkflowError> {
    let minutes: f64 = field.trim().parse().map_err(|_| WorkflowError::Malformed {
        line,
        msg: format!("invalid duration `{field}`"),
    })?;
    if !minutes.is_finite() || minutes < 0.0 {
        return Err(WorkflowError::Malformed {
            line,
            msg: format!("duration `{field}` must be finite and non-negative"),
        });
    }
    let seconds = minutes * 60.0;
    let rounded = seconds.round();
    if (seconds - rounded).abs() > 1e-6 || rounded > u64::MAX as f64 {
        return Err(WorkflowError::Malformed {
            line,
            msg: format!("duration `{field}` min does not convert to whole seconds"),
        });
    }
    Ok(rounded as Seconds)
}

/// Parses the textual task list into a raw DAG. Purely syntactic; graph
/// validation happens in [`augment_and_validate`].
pub fn parse_workflow_str(input: &str) -> Result<RawDag, WorkflowError> {
    let mut tasks = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line_no = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(WorkflowError::Malformed {
                line: line_no,
                msg: format!("expected 3 or 4 fields, found {}", fields.len()),
            });
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(WorkflowError::Malformed { line: line_no, msg: "empty task id".into() });
        }
        let estimated = minutes_to_seconds(fields[1], line_no)?;
        let actual = minutes_to_seconds(fields[2], line_no)?;
        let mut predecessors = Vec::new();
        if let Some(preds) = fields.get(3) {
            for part in preds.split(';') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                let (pred, latency) = match part.split_once(':') {
                    Some((p, lat)) => {
                        let latency: Seconds =
                            lat.trim().parse().map_err(|_| WorkflowError::Malformed {
                                line: line_no,
                                msg: format!("invalid edge latency `{lat}`"),
                            })?;
                        (p.trim(), latency)
                    }
                    None => (part, 0),
                };
                if pred.is_empty() {
                    return Err(WorkflowError::Malformed {
                        line: line_no,
                        msg: "empty predecessor id".into(),
                    });
                }
                predecessors.push((pred.to_string(), latency));
            }
        }
        tasks.push(RawTask {
            id: id.to_string(),
            estimated,
            actual,
            predecessors,
        });
    }
    Ok(RawDag { tasks })
}

/// Loads, parses, validates and augments a workflow definition file.
pub fn load_workflow_file(
    path: &Path,
    workflow_id: impl Into<String>,
    contingency: f64,
) -> Result<WorkflowSpec, WorkflowError> {
    let text = std::fs::read_to_string(path)?;
    let raw = parse_workflow_str(&text)?;
    augment_and_validate(raw, workflow_id, contingency)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_file() {
        let text = "# demo\nA,32,32,\nB,32,30,A\nC,16,16,A;B\n";
        let raw = parse_workflow_str(text).unwrap();
        assert_eq!(raw.tasks.len(), 3);
        assert_eq!(raw.tasks[0].estimated, 32 * 60);
        assert_eq!(raw.tasks[1].actual, 30 * 60);
        assert_eq!(raw.tasks[2].predecessors.len(), 2);
    }

    #[test]
    fn parses_edge_latency_extension() {
        let raw = parse_workflow_str("A,1,1,\nB,1,1,A:120\n").unwrap();
        assert_eq!(raw.tasks[1].predecessors, vec![("A".to_string(), 120)]);
    }

    #[test]
    fn accepts_three_field_roots_and_fractional_minutes() {
        let raw = parse_workflow_str("A,0.5,0.5\n").unwrap();
        assert_eq!(raw.tasks[0].estimated, 30);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            parse_workflow_str("A\n"),
            Err(WorkflowError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_workflow_str("A,x,1,\n"),
            Err(WorkflowError::Malformed { .. })
        ));
        assert!(matches!(
            parse_workflow_str("A,1,1,B:zz\n"),
            Err(WorkflowError::Malformed { .. })
        ));
        assert!(matches!(
            parse_workflow_str("A,-1,1,\n"),
            Err(WorkflowError::Malformed { .. })
        ));
    }

    #[test]
    fn parse_then_validate_roundtrip() {
        let wf = augment_and_validate(
            parse_workflow_str("A,32,32,\nB,32,32,\nF,32,32,A;B\n").unwrap(),
            "w",
            0.5,
        )
        .unwrap();
        assert_eq!(wf.real_task_count(), 3);
    }
}
