//! File formats owned by the pipeline: cleaned/calibrated rows and
//! calibration model records.
//!
//! Cleaned rows extend the gateway export schema with a `stage` column:
//! `created_at,pm10,pm25,temp,rh,stage`. Model records are
//! `device_id,season,pollutant,m,c,rmse,n`.

use std::io::{Read, Write};

use airnet_core::timefmt::{parse_time, to_iso};

use crate::calibrate::CalibrationModel;
use crate::clean::Stage;
use crate::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CleanRow {
    pub t: u64,
    pub pm10: f64,
    pub pm25: f64,
    pub temp: f64,
    pub rh: f64,
    pub stage: Stage,
}

const CLEAN_HEADER: [&str; 6] = ["created_at", "pm10", "pm25", "temp", "rh", "stage"];

pub fn write_clean_csv<W: Write>(rows: &[CleanRow], out: W) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CLEAN_HEADER)
        .map_err(|e| PipelineError::Csv(e.to_string()))?;
    for r in rows {
        w.write_record([
            to_iso(r.t),
            r.pm10.to_string(),
            r.pm25.to_string(),
            r.temp.to_string(),
            r.rh.to_string(),
            r.stage.to_string(),
        ])
        .map_err(|e| PipelineError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_clean_csv<R: Read>(input: R) -> Result<Vec<CleanRow>, PipelineError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| PipelineError::Csv(e.to_string()))?
        .clone();
    for (i, expected) in CLEAN_HEADER.iter().enumerate() {
        match headers.get(i) {
            Some(actual) if actual == *expected => {}
            other => {
                return Err(PipelineError::Csv(format!(
                    "column {i}: expected {expected:?}, found {:?}",
                    other.unwrap_or("<missing>")
                )))
            }
        }
    }
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| PipelineError::Csv(e.to_string()))?;
        let field = |i: usize| -> Result<&str, PipelineError> {
            record.get(i).ok_or_else(|| {
                PipelineError::Csv(format!("row {}: missing {}", line + 2, CLEAN_HEADER[i]))
            })
        };
        let num = |i: usize| -> Result<f64, PipelineError> {
            field(i)?.parse().map_err(|e| {
                PipelineError::Csv(format!("row {}, {}: {e}", line + 2, CLEAN_HEADER[i]))
            })
        };
        out.push(CleanRow {
            t: parse_time(field(0)?).map_err(PipelineError::Csv)?,
            pm10: num(1)?,
            pm25: num(2)?,
            temp: num(3)?,
            rh: num(4)?,
            stage: field(5)?
                .parse()
                .map_err(|e: String| PipelineError::Csv(format!("row {}: {e}", line + 2)))?,
        });
    }
    Ok(out)
}

pub fn write_models_csv<W: Write>(
    models: &[CalibrationModel],
    out: W,
) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["device_id", "season", "pollutant", "m", "c", "rmse", "n"])
        .map_err(|e| PipelineError::Csv(e.to_string()))?;
    for m in models {
        w.write_record([
            m.device_id.to_string(),
            m.season.to_string(),
            m.pollutant.to_string(),
            m.m.to_string(),
            m.c.to_string(),
            m.fit_rmse.to_string(),
            m.n_points.to_string(),
        ])
        .map_err(|e| PipelineError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| PipelineError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_models_csv<R: Read>(input: R) -> Result<Vec<CalibrationModel>, PipelineError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| PipelineError::Csv(e.to_string()))?;
        let field = |i: usize, name: &str| -> Result<&str, PipelineError> {
            record
                .get(i)
                .ok_or_else(|| PipelineError::Csv(format!("model record missing {name}")))
        };
        out.push(CalibrationModel {
            device_id: field(0, "device_id")?
                .parse()
                .map_err(|e| PipelineError::Csv(format!("device_id: {e}")))?,
            season: field(1, "season")?.parse().map_err(PipelineError::Csv)?,
            pollutant: field(2, "pollutant")?.parse().map_err(PipelineError::Csv)?,
            m: field(3, "m")?
                .parse()
                .map_err(|e| PipelineError::Csv(format!("m: {e}")))?,
            c: field(4, "c")?
                .parse()
                .map_err(|e| PipelineError::Csv(format!("c: {e}")))?,
            fit_rmse: field(5, "rmse")?
                .parse()
                .map_err(|e| PipelineError::Csv(format!("rmse: {e}")))?,
            n_points: field(6, "n")?
                .parse()
                .map_err(|e| PipelineError::Csv(format!("n: {e}")))?,
        });
    }
    Ok(out)
}
