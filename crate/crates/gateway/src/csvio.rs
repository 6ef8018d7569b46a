//! CSV schemas: reading exports and deployment maps.
//!
//! Readings: `created_at,pm10,pm25,temp,rh` with ISO 8601 UTC timestamps,
//! one row per reading, time-ordered (ISO strings sort lexicographically).
//! Deployments: `device_id,lat,lon,location_type`.

use std::io::{Read, Write};

use airnet_core::timefmt::{parse_time, to_iso};
use airnet_proto::SensorReading;

use crate::GatewayError;

pub const READING_HEADER: [&str; 5] = ["created_at", "pm10", "pm25", "temp", "rh"];

/// Writes readings in the export schema.
pub fn export_csv<W: Write>(readings: &[SensorReading], out: W) -> Result<(), GatewayError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(READING_HEADER)
        .map_err(|e| GatewayError::Csv(e.to_string()))?;
    for r in readings {
        w.write_record([
            to_iso(r.created_at),
            r.pm10.to_string(),
            r.pm25.to_string(),
            r.temp.to_string(),
            r.rh.to_string(),
        ])
        .map_err(|e| GatewayError::Csv(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the export schema back. Column order is fixed; a wrong header
/// names the offending column.
pub fn import_csv<R: Read>(input: R) -> Result<Vec<SensorReading>, GatewayError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| GatewayError::Csv(e.to_string()))?
        .clone();
    for (i, expected) in READING_HEADER.iter().enumerate() {
        match headers.get(i) {
            Some(actual) if actual == *expected => {}
            other => {
                return Err(GatewayError::Csv(format!(
                    "column {i}: expected {expected:?}, found {:?}",
                    other.unwrap_or("<missing>")
                )))
            }
        }
    }
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| GatewayError::Csv(e.to_string()))?;
        let field = |i: usize| -> Result<&str, GatewayError> {
            record.get(i).ok_or_else(|| {
                GatewayError::Csv(format!("row {}: missing column {}", line + 2, READING_HEADER[i]))
            })
        };
        let parse_f32 = |i: usize| -> Result<f32, GatewayError> {
            field(i)?.parse().map_err(|e| {
                GatewayError::Csv(format!(
                    "row {}, column {}: {e}",
                    line + 2,
                    READING_HEADER[i]
                ))
            })
        };
        out.push(SensorReading {
            created_at: parse_time(field(0)?)
                .map_err(|e| GatewayError::Csv(format!("row {}: {e}", line + 2)))?,
            pm10: parse_f32(1)?,
            pm25: parse_f32(2)?,
            temp: parse_f32(3)?,
            rh: parse_f32(4)?,
        });
    }
    Ok(out)
}

/// One row of a deployment CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteRecord {
    pub device_id: u16,
    pub lat: f64,
    pub lon: f64,
    pub location_type: String,
}

pub fn write_deployment_csv<W: Write>(sites: &[SiteRecord], out: W) -> Result<(), GatewayError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["device_id", "lat", "lon", "location_type"])
        .map_err(|e| GatewayError::Csv(e.to_string()))?;
    for s in sites {
        w.write_record([
            s.device_id.to_string(),
            s.lat.to_string(),
            s.lon.to_string(),
            s.location_type.clone(),
        ])
        .map_err(|e| GatewayError::Csv(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_deployment_csv<R: Read>(input: R) -> Result<Vec<SiteRecord>, GatewayError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| GatewayError::Csv(e.to_string()))?;
        let get = |i: usize, name: &str| -> Result<&str, GatewayError> {
            record
                .get(i)
                .ok_or_else(|| GatewayError::Csv(format!("deployment row missing {name}")))
        };
        out.push(SiteRecord {
            device_id: get(0, "device_id")?
                .parse()
                .map_err(|e| GatewayError::Csv(format!("device_id: {e}")))?,
            lat: get(1, "lat")?
                .parse()
                .map_err(|e| GatewayError::Csv(format!("lat: {e}")))?,
            lon: get(2, "lon")?
                .parse()
                .map_err(|e| GatewayError::Csv(format!("lon: {e}")))?,
            location_type: get(3, "location_type")?.to_string(),
        });
    }
    Ok(out)
}
