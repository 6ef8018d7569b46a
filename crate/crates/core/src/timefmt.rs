//! Epoch-seconds <-> ISO 8601 UTC strings, as used in every CSV and API
//! surface of the workspace.

use chrono::{DateTime, Utc};

/// Formats as `2021-11-04T20:00:00Z`. Lexicographic order equals time order.
pub fn to_iso(t: u64) -> String {
    DateTime::<Utc>::from_timestamp(t as i64, 0)
        .expect("epoch seconds in range")
        .format("%Y-%m-%dT%H:%M:%SZ")
        .to_string()
}

/// Parses an RFC 3339 timestamp or a plain integer of epoch seconds.
pub fn parse_time(s: &str) -> Result<u64, String> {
    if let Ok(secs) = s.parse::<u64>() {
        return Ok(secs);
    }
    let dt = DateTime::parse_from_rfc3339(s).map_err(|e| format!("bad timestamp {s:?}: {e}"))?;
    let secs = dt.timestamp();
    if secs < 0 {
        return Err(format!("timestamp {s:?} is before 1970"));
    }
    Ok(secs as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_and_parses_round_trip() {
        let t = 1_636_056_000; // 2021-11-04T20:00:00Z
        let iso = to_iso(t);
        assert_eq!(iso, "2021-11-04T20:00:00Z");
        assert_eq!(parse_time(&iso).unwrap(), t);
        assert_eq!(parse_time("1636056000").unwrap(), t);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_time("yesterday").is_err());
        assert!(parse_time("1969-12-31T00:00:00Z").is_err());
    }
}
