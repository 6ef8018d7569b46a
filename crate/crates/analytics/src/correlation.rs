//! Pairwise rank correlation versus device separation.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use airnet_core::kendall::{tau_b, TauError};
use airnet_core::Point;

use crate::AnalyticsError;

/// One unordered device pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPoint {
    pub device_a: u16,
    pub device_b: u16,
    pub distance_m: f64,
    pub tau: f64,
    pub n_samples: usize,
}

/// A pair that produced no correlation point, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct PairNotice {
    pub device_a: u16,
    pub device_b: u16,
    pub reason: String,
}

/// Inner join of two sorted (timestamp, value) series.
fn join(a: &[(u64, f64)], b: &[(u64, f64)]) -> (Vec<f64>, Vec<f64>) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                xs.push(a[i].1);
                ys.push(b[j].1);
                i += 1;
                j += 1;
            }
        }
    }
    (xs, ys)
}

/// Kendall tau-b per unordered device pair over the overlapping timestamps
/// of their (typically hourly) series. Pairs with fewer than `min_overlap`
/// shared samples, or an undefined correlation, are skipped with a notice.
pub fn correlation_vs_distance(
    sites: &[(u16, Point)],
    series: &BTreeMap<u16, Vec<(u64, f64)>>,
    min_overlap: usize,
) -> (Vec<CorrelationPoint>, Vec<PairNotice>) {
    let mut sorted: Vec<(u16, Point)> = sites.to_vec();
    sorted.sort_by_key(|s| s.0);
    let mut points = Vec::new();
    let mut notices = Vec::new();
    for (i, &(id_a, p_a)) in sorted.iter().enumerate() {
        for &(id_b, p_b) in &sorted[i + 1..] {
            let (Some(sa), Some(sb)) = (series.get(&id_a), series.get(&id_b)) else {
                notices.push(PairNotice {
                    device_a: id_a,
                    device_b: id_b,
                    reason: "missing series".into(),
                });
                continue;
            };
            let (xs, ys) = join(sa, sb);
            if xs.len() < min_overlap.max(2) {
                notices.push(PairNotice {
                    device_a: id_a,
                    device_b: id_b,
                    reason: format!("only {} overlapping samples", xs.len()),
                });
                continue;
            }
            match tau_b(&xs, &ys) {
                Ok(tau) => points.push(CorrelationPoint {
                    device_a: id_a,
                    device_b: id_b,
                    distance_m: p_a.haversine(&p_b),
                    tau,
                    n_samples: xs.len(),
                }),
                Err(TauError::AllTied(side)) => notices.push(PairNotice {
                    device_a: id_a,
                    device_b: id_b,
                    reason: format!("correlation undefined: all values tied on {side}"),
                }),
                Err(e) => notices.push(PairNotice {
                    device_a: id_a,
                    device_b: id_b,
                    reason: e.to_string(),
                }),
            }
        }
    }
    (points, notices)
}

/// Mean tau over pairs whose separation satisfies `predicate`.
pub fn mean_tau_where(
    points: &[CorrelationPoint],
    predicate: impl Fn(f64) -> bool,
) -> Option<f64> {
    let selected: Vec<f64> = points
        .iter()
        .filter(|p| predicate(p.distance_m))
        .map(|p| p.tau)
        .collect();
    if selected.is_empty() {
        None
    } else {
        Some(selected.iter().sum::<f64>() / selected.len() as f64)
    }
}

pub fn write_correlation_csv<W: Write>(
    points: &[CorrelationPoint],
    out: W,
) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["device_a", "device_b", "distance_m", "tau", "n"])
        .map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    for p in points {
        w.write_record([
            p.device_a.to_string(),
            p.device_b.to_string(),
            p.distance_m.to_string(),
            p.tau.to_string(),
            p.n_samples.to_string(),
        ])
        .map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_correlation_csv<R: Read>(input: R) -> Result<Vec<CorrelationPoint>, AnalyticsError> {
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| AnalyticsError::Csv(e.to_string()))?;
        let get = |i: usize, name: &str| -> Result<&str, AnalyticsError> {
            record
                .get(i)
                .ok_or_else(|| AnalyticsError::Csv(format!("correlation row missing {name}")))
        };
        out.push(CorrelationPoint {
            device_a: get(0, "device_a")?
                .parse()
                .map_err(|e| AnalyticsError::Csv(format!("device_a: {e}")))?,
            device_b: get(1, "device_b")?
                .parse()
                .map_err(|e| AnalyticsError::Csv(format!("device_b: {e}")))?,
            distance_m: get(2, "distance_m")?
                .parse()
                .map_err(|e| AnalyticsError::Csv(format!("distance_m: {e}")))?,
            tau: get(3, "tau")?
                .parse()
                .map_err(|e| AnalyticsError::Csv(format!("tau: {e}")))?,
            n_samples: get(4, "n")?
                .parse()
                .map_err(|e| AnalyticsError::Csv(format!("n: {e}")))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sites_49() -> Vec<(u16, Point)> {
        (0..49)
            .map(|i| {
                (
                    (i + 1) as u16,
                    Point {
                        lat: 17.43 + (i / 7) as f64 * 0.0026,
                        lon: 78.34 + (i % 7) as f64 * 0.0026,
                    },
                )
            })
            .collect()
    }

    fn hourly(values: &[f64]) -> Vec<(u64, f64)> {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i as u64) * 3_600, v))
            .collect()
    }

    #[test]
    fn forty_nine_devices_make_1176_pairs() {
        let sites = sites_49();
        let series: BTreeMap<u16, Vec<(u64, f64)>> = sites
            .iter()
            .map(|&(id, _)| {
                let vals: Vec<f64> = (0..48).map(|h| ((h + id as usize) % 13) as f64).collect();
                (id, hourly(&vals))
            })
            .collect();
        let (points, notices) = correlation_vs_distance(&sites, &series, 24);
        assert_eq!(points.len(), 49 * 48 / 2);
        assert!(notices.is_empty());
        // Self-pairs excluded by construction.
        assert!(points.iter().all(|p| p.device_a < p.device_b));
    }

    #[test]
    fn colocated_identical_series_have_tau_one_at_distance_zero() {
        let p = Point { lat: 17.44, lon: 78.35 };
        let sites = vec![(1u16, p), (2u16, p)];
        let vals: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut series = BTreeMap::new();
        series.insert(1, hourly(&vals));
        series.insert(2, hourly(&vals));
        let (points, _) = correlation_vs_distance(&sites, &series, 24);
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].distance_m, 0.0);
        assert_eq!(points[0].tau, 1.0);
    }

    #[test]
    fn short_overlap_and_constant_series_are_skipped_with_notice() {
        let sites = vec![
            (1u16, Point { lat: 17.44, lon: 78.35 }),
            (2u16, Point { lat: 17.45, lon: 78.36 }),
            (3u16, Point { lat: 17.46, lon: 78.37 }),
        ];
        let mut series = BTreeMap::new();
        series.insert(1, hourly(&[1.0, 2.0, 3.0]));
        series.insert(2, hourly(&(0..30).map(|i| i as f64).collect::<Vec<_>>()));
        series.insert(3, hourly(&vec![5.0; 30]));
        let (points, notices) = correlation_vs_distance(&sites, &series, 24);
        assert!(points.is_empty());
        assert_eq!(notices.len(), 3);
        assert!(notices.iter().any(|n| n.reason.contains("overlapping")));
        assert!(notices.iter().any(|n| n.reason.contains("tied")));
    }

    #[test]
    fn csv_round_trip() {
        let points = vec![CorrelationPoint {
            device_a: 1,
            device_b: 2,
            distance_m: 385.25,
            tau: 0.625,
            n_samples: 72,
        }];
        let mut buf = Vec::new();
        write_correlation_csv(&points, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("device_a,device_b,distance_m,tau,n\n"));
        assert_eq!(read_correlation_csv(&buf[..]).unwrap(), points);
    }
}
