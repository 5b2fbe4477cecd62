//! Interactive-user trace: login/logout intervals that claim a resource
//! for its primary user, evicting any running HTC work.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::Timestamp;

/// One primary-user session on one resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub resource: u32,
    pub login: Timestamp,
    pub logout: Timestamp,
}

/// Parses `resource_id,login_time,logout_time` rows. Syntactic only; use
/// [`validate_sessions`] before feeding a trace to the engine.
pub fn parse_interactive_csv<R: Read>(input: R) -> Result<Vec<Session>, SimError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let mut sessions = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| SimError::MalformedTrace(format!("row {row}: {e}")))?;
        if record.len() != 3 {
            return Err(SimError::MalformedTrace(format!(
                "row {row}: expected 3 fields, found {}",
                record.len()
            )));
        }
        let parse_i64 = |idx: usize, name: &str| -> Result<i64, SimError> {
            record
                .get(idx)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| SimError::MalformedTrace(format!("row {row}: invalid {name}")))
        };
        let resource = record
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| SimError::MalformedTrace(format!("row {row}: invalid resource id")))?;
        sessions.push(Session {
            resource,
            login: parse_i64(1, "login_time")?,
            logout: parse_i64(2, "logout_time")?,
        });
    }
    Ok(sessions)
}

pub fn write_interactive_csv<W: Write>(sessions: &[Session], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["resource_id", "login_time", "logout_time"])
        .map_err(|e| SimError::MalformedTrace(e.to_string()))?;
    for s in sessions {
        w.write_record(&[s.resource.to_string(), s.login.to_string(), s.logout.to_string()])
            .map_err(|e| SimError::MalformedTrace(e.to_string()))?;
    }
    w.flush().map_err(|e| SimError::MalformedTrace(e.to_string()))?;
    Ok(())
}

/// Checks the engine's preconditions: sessions sorted by login time,
/// non-negative spans, and resource ids within the cluster.
pub fn validate_sessions(sessions: &[Session], resource_count: u32) -> Result<(), SimError> {
    let mut last_login = Timestamp::MIN;
    for (i, s) in sessions.iter().enumerate() {
        if s.logout < s.login {
            return Err(SimError::MalformedTrace(format!(
                "session {i}: logout {} before login {}",
                s.logout, s.login
            )));
        }
        if s.login < last_login {
            return Err(SimError::MalformedTrace(format!(
                "session {i}: trace not sorted by login time"
            )));
        }
        if s.resource >= resource_count {
            return Err(SimError::MalformedTrace(format!(
                "session {i}: resource {} outside cluster of {}",
                s.resource, resource_count
            )));
        }
        last_login = s.login;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let sessions = vec![
            Session { resource: 0, login: 100, logout: 200 },
            Session { resource: 3, login: 150, logout: 151 },
        ];
        let mut buf = Vec::new();
        write_interactive_csv(&sessions, &mut buf).unwrap();
        let back = parse_interactive_csv(buf.as_slice()).unwrap();
        assert_eq!(back, sessions);
    }

    #[test]
    fn validation_catches_disorder_and_bad_spans() {
        let bad_span = vec![Session { resource: 0, login: 10, logout: 5 }];
        assert!(validate_sessions(&bad_span, 4).is_err());
        let unsorted = vec![
            Session { resource: 0, login: 10, logout: 20 },
            Session { resource: 1, login: 5, logout: 9 },
        ];
        assert!(validate_sessions(&unsorted, 4).is_err());
        let out_of_range = vec![Session { resource: 9, login: 0, logout: 1 }];
        assert!(validate_sessions(&out_of_range, 4).is_err());
        assert!(validate_sessions(&[], 1).is_ok());
    }

    #[test]
    fn parse_rejects_malformed_rows() {
        let text = "resource_id,login_time,logout_time\n0,abc,10\n";
        assert!(parse_interactive_csv(text.as_bytes()).is_err());
        let text = "resource_id,login_time,logout_time\n0,1\n";
        assert!(parse_interactive_csv(text.as_bytes()).is_err());
    }
}
