//! CSV persistence for Q tables, enabling warm-started runs and offline
//! inspection. Columns: hour, phi_bin, action, count, mean_reward.

use std::io::{Read, Write};

use super::{PolicyError, QTable, State};

/// Writes every visited cell, ordered by (hour, phi_bin, action).
pub fn export_csv<W: Write>(table: &QTable, out: W) -> Result<(), PolicyError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["hour", "phi_bin", "action", "count", "mean_reward"])?;
    for state in table.visited_states() {
        for action in 1..=table.actions() {
            let count = table.count(state, action);
            if count == 0 {
                continue;
            }
            w.write_record(&[
                state.hour.to_string(),
                state.phi_bin.to_string(),
                action.to_string(),
                count.to_string(),
                table.mean(state, action).to_string(),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Loads rows into a fresh table with the given dimensions. Rows must be
/// in range for those dimensions; duplicate (state, action) rows keep the
/// last value.
pub fn import_csv<R: Read>(
    input: R,
    n: u32,
    p_max: f64,
    actions: u8,
) -> Result<QTable, PolicyError> {
    let mut table = QTable::new(n, p_max, actions);
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is line 1
        let record = record?;
        if record.len() != 5 {
            return Err(PolicyError::InvalidRow {
                row,
                msg: format!("expected 5 fields, found {}", record.len()),
            });
        }
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();
        let hour: u8 = field(0)
            .parse()
            .map_err(|_| PolicyError::InvalidRow { row, msg: "invalid hour".into() })?;
        let phi_bin: u8 = field(1)
            .parse()
            .map_err(|_| PolicyError::InvalidRow { row, msg: "invalid phi_bin".into() })?;
        let action: u8 = field(2)
            .parse()
            .map_err(|_| PolicyError::InvalidRow { row, msg: "invalid action".into() })?;
        let count: u64 = field(3)
            .parse()
            .map_err(|_| PolicyError::InvalidRow { row, msg: "invalid count".into() })?;
        let mean: f64 = field(4)
            .parse()
            .map_err(|_| PolicyError::InvalidRow { row, msg: "invalid mean_reward".into() })?;
        if hour >= 24 {
            return Err(PolicyError::InvalidRow { row, msg: format!("hour {hour} out of range") });
        }
        if phi_bin as u32 >= n + 2 {
            return Err(PolicyError::InvalidRow {
                row,
                msg: format!("phi_bin {phi_bin} out of range for n={n}"),
            });
        }
        if action < 1 || action > actions {
            return Err(PolicyError::InvalidRow {
                row,
                msg: format!("action {action} out of range"),
            });
        }
        if !mean.is_finite() {
            return Err(PolicyError::InvalidRow { row, msg: "non-finite mean".into() });
        }
        table.set_cell(State { hour, phi_bin }, action, count, mean);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_visited_cells() {
        let mut t = QTable::new(10, 1.0, 5);
        t.update(State { hour: 3, phi_bin: 2 }, 1, 0.7);
        t.update(State { hour: 3, phi_bin: 2 }, 1, -5.0);
        t.update(State { hour: 23, phi_bin: 11 }, 5, 0.1);
        let mut buf = Vec::new();
        export_csv(&t, &mut buf).unwrap();
        let back = import_csv(buf.as_slice(), 10, 1.0, 5).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn import_rejects_out_of_range_rows() {
        let csv = "hour,phi_bin,action,count,mean_reward\n25,0,1,1,0.0\n";
        assert!(matches!(
            import_csv(csv.as_bytes(), 10, 1.0, 5),
            Err(PolicyError::InvalidRow { .. })
        ));
        let csv = "hour,phi_bin,action,count,mean_reward\n1,0,9,1,0.0\n";
        assert!(import_csv(csv.as_bytes(), 10, 1.0, 5).is_err());
        let csv = "hour,phi_bin,action,count,mean_reward\n1,0,1,1,nan\n";
        assert!(import_csv(csv.as_bytes(), 10, 1.0, 5).is_err());
    }

    #[test]
    fn import_tolerates_empty_table() {
        let csv = "hour,phi_bin,action,count,mean_reward\n";
        let t = import_csv(csv.as_bytes(), 10, 1.0, 5).unwrap();
        assert!(t.visited_states().is_empty());
    }
}
