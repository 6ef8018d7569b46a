//! Aggregation queries over stored channels.

use serde::Serialize;

use airnet_core::series::bucket_start;
use airnet_proto::SensorReading;

use crate::store::Gateway;
use crate::GatewayError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Raw,
    #[serde(rename = "10min")]
    TenMin,
    Hourly,
}

impl Aggregation {
    pub fn parse(s: &str) -> Result<Self, GatewayError> {
        match s {
            "raw" => Ok(Aggregation::Raw),
            "10min" => Ok(Aggregation::TenMin),
            "hourly" => Ok(Aggregation::Hourly),
            other => Err(GatewayError::BadQuery(format!(
                "unknown aggregation {other:?} (expected raw, 10min or hourly)"
            ))),
        }
    }

    pub fn bucket_width_s(&self) -> Option<u64> {
        match self {
            Aggregation::Raw => None,
            Aggregation::TenMin => Some(600),
            Aggregation::Hourly => Some(3_600),
        }
    }
}

/// `device_id = None` queries every known device.
#[derive(Debug, Clone, Copy)]
pub struct QueryRequest {
    pub device_id: Option<u16>,
    pub from: u64,
    pub to: u64,
    pub agg: Aggregation,
}

/// One output point: the raw reading, or the arithmetic mean of the
/// readings inside a left-closed bucket labeled by its start.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggPoint {
    pub t: String,
    pub pm10: f64,
    pub pm25: f64,
    pub temp: f64,
    pub rh: f64,
    pub n: u64,
}

fn mean_point(bucket: u64, group: &[SensorReading]) -> AggPoint {
    let n = group.len() as f64;
    let mut sums = [0.0f64; 4];
    for r in group {
        sums[0] += r.pm10 as f64;
        sums[1] += r.pm25 as f64;
        sums[2] += r.temp as f64;
        sums[3] += r.rh as f64;
    }
    AggPoint {
        t: airnet_core::timefmt::to_iso(bucket),
        pm10: sums[0] / n,
        pm25: sums[1] / n,
        temp: sums[2] / n,
        rh: sums[3] / n,
        n: group.len() as u64,
    }
}

/// Aggregates one device's readings; empty buckets are omitted.
pub fn query_series(
    gateway: &Gateway,
    device_id: u16,
    from: u64,
    to: u64,
    agg: Aggregation,
) -> Result<Vec<AggPoint>, GatewayError> {
    let readings = gateway.channel_readings_in(device_id, from, to)?;
    match agg.bucket_width_s() {
        None => Ok(readings
            .iter()
            .map(|r| mean_point(r.created_at, std::slice::from_ref(r)))
            .collect()),
        Some(width) => {
            let mut out = Vec::new();
            let mut start = 0usize;
            while start < readings.len() {
                let bucket = bucket_start(readings[start].created_at, width);
                let mut end = start;
                while end < readings.len()
                    && bucket_start(readings[end].created_at, width) == bucket
                {
                    end += 1;
                }
                out.push(mean_point(bucket, &readings[start..end]));
                start = end;
            }
            Ok(out)
        }
    }
}

/// Runs a [`QueryRequest`], fanning out to all devices when none is named.
pub fn query(
    gateway: &Gateway,
    req: &QueryRequest,
) -> Result<Vec<(u16, Vec<AggPoint>)>, GatewayError> {
    let ids = match req.device_id {
        Some(id) => vec![id],
        None => gateway.device_ids(),
    };
    ids.into_iter()
        .map(|id| Ok((id, query_series(gateway, id, req.from, req.to, req.agg)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use airnet_proto::{encode_frame, Frame};

    fn gateway_with(times_and_pm10: &[(u64, f32)]) -> Gateway {
        let gw = Gateway::in_memory();
        let readings = times_and_pm10
            .iter()
            .map(|&(t, v)| SensorReading::new(t, v, v / 2.0, 25.0, 55.0))
            .collect();
        gw.handle_frame(&encode_frame(&Frame::new(1, readings)).unwrap())
            .unwrap();
        gw
    }

    #[test]
    fn raw_query_returns_stored_readings_in_range() {
        let gw = gateway_with(&[(30, 10.0), (60, 20.0), (90, 30.0)]);
        let pts = query_series(&gw, 1, 60, 90, Aggregation::Raw).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].pm10, 20.0);
        assert_eq!(pts[1].pm10, 30.0);
        assert!(pts.iter().all(|p| p.n == 1));
    }

    #[test]
    fn two_readings_average_in_one_hourly_bucket() {
        let gw = gateway_with(&[(100, 10.0), (200, 20.0)]);
        let pts = query_series(&gw, 1, 0, u64::MAX, Aggregation::Hourly).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].pm10, 15.0);
        assert_eq!(pts[0].n, 2);
        assert_eq!(pts[0].t, "1970-01-01T00:00:00Z");
    }

    #[test]
    fn thirty_second_cadence_fills_exactly_one_hourly_bucket() {
        let times: Vec<(u64, f32)> = (0..120).map(|i| (i * 30, i as f32)).collect();
        let gw = gateway_with(&times);
        let pts = query_series(&gw, 1, 0, 3_599, Aggregation::Hourly).unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].n, 120);
        assert!((pts[0].pm10 - 59.5).abs() < 1e-9);
    }

    #[test]
    fn ten_minute_means_weighted_by_count_equal_hourly_mean() {
        let times: Vec<(u64, f32)> = (0..120)
            .map(|i| (i * 30, ((i * 37) % 113) as f32))
            .collect();
        let gw = gateway_with(&times);
        let ten = query_series(&gw, 1, 0, 3_599, Aggregation::TenMin).unwrap();
        let hour = query_series(&gw, 1, 0, 3_599, Aggregation::Hourly).unwrap();
        let weighted: f64 = ten.iter().map(|p| p.pm10 * p.n as f64).sum::<f64>()
            / ten.iter().map(|p| p.n as f64).sum::<f64>();
        assert!((weighted - hour[0].pm10).abs() < 1e-9);
    }

    #[test]
    fn identical_requests_serialize_identically() {
        let gw = gateway_with(&[(30, 10.5), (90, 12.25)]);
        let a = query_series(&gw, 1, 0, u64::MAX, Aggregation::Hourly).unwrap();
        let b = query_series(&gw, 1, 0, u64::MAX, Aggregation::Hourly).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
