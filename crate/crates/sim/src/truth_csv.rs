//! Ground-truth trace export: `created_at,lat,lon,pm10,pm25`, ISO 8601 UTC.
//!
//! These files let downstream stages be checked against the exact field the
//! sensors sampled.

use std::io::{Read, Write};

use airnet_core::timefmt::{parse_time, to_iso};

use crate::scenario::ScenarioError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRow {
    pub t: u64,
    pub lat: f64,
    pub lon: f64,
    pub pm10: f64,
    pub pm25: f64,
}

pub struct TruthWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TruthWriter<W> {
    pub fn new(out: W) -> Result<Self, ScenarioError> {
        let mut inner = csv::Writer::from_writer(out);
        inner
            .write_record(["created_at", "lat", "lon", "pm10", "pm25"])
            .map_err(|e| ScenarioError::Invalid {
                path: "truth csv".into(),
                message: e.to_string(),
            })?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &TruthRow) -> Result<(), ScenarioError> {
        self.inner
            .write_record([
                to_iso(row.t),
                row.lat.to_string(),
                row.lon.to_string(),
                row.pm10.to_string(),
                row.pm25.to_string(),
            ])
            .map_err(|e| ScenarioError::Invalid {
                path: "truth csv".into(),
                message: e.to_string(),
            })
    }

    pub fn finish(mut self) -> Result<(), ScenarioError> {
        self.inner.flush().map_err(|e| ScenarioError::Invalid {
            path: "truth csv".into(),
            message: e.to_string(),
        })
    }
}

pub fn read_truth_csv<R: Read>(input: R) -> Result<Vec<TruthRow>, ScenarioError> {
    let bad = |message: String| ScenarioError::Invalid {
        path: "truth csv".into(),
        message,
    };
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let get = |i: usize, name: &str| -> Result<&str, ScenarioError> {
            record.get(i).ok_or_else(|| bad(format!("missing column {name}")))
        };
        let num = |i: usize, name: &str| -> Result<f64, ScenarioError> {
            get(i, name)?
                .parse()
                .map_err(|e| bad(format!("{name}: {e}")))
        };
        out.push(TruthRow {
            t: parse_time(get(0, "created_at")?).map_err(bad)?,
            lat: num(1, "lat")?,
            lon: num(2, "lon")?,
            pm10: num(3, "pm10")?,
            pm25: num(4, "pm25")?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let rows = vec![
            TruthRow { t: 1_627_776_000, lat: 17.4401, lon: 78.3502, pm10: 40.25, pm25: 22.1375 },
            TruthRow { t: 1_627_776_030, lat: 17.4401, lon: 78.3502, pm10: 40.5, pm25: 22.275 },
        ];
        let mut buf = Vec::new();
        let mut w = TruthWriter::new(&mut buf).unwrap();
        for r in &rows {
            w.write(r).unwrap();
        }
        w.finish().unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("created_at,lat,lon,pm10,pm25\n"));
        assert_eq!(read_truth_csv(&buf[..]).unwrap(), rows);
    }
}
