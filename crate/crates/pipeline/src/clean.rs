//! Reliability filtering, IQR outlier removal and gap interpolation.

use serde::{Deserialize, Serialize};

use airnet_core::stats::{iqr_bounds, IqrBounds};

use crate::{month_of, PipelineError, TimeSeries};

/// Hardware range of the PM sensor; values outside are unreliable.
const VALUE_RANGE: (f64, f64) = (0.0, 999.9);
/// PM readings above this relative humidity are unreliable.
const RH_LIMIT: f64 = 80.0;
/// Outlier fences need at least this many surviving points in a window.
const MIN_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    HighRh,
    OutOfRange,
    Outlier,
}

/// Provenance of a row in a cleaned file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Measured value survived every filter.
    Clean,
    /// Value was removed and re-estimated by interpolation.
    Interp,
    /// Value passed through the calibration map.
    Calibrated,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Clean => "clean",
            Stage::Interp => "interp",
            Stage::Calibrated => "calibrated",
        })
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "clean" => Ok(Stage::Clean),
            "interp" => Ok(Stage::Interp),
            "calibrated" => Ok(Stage::Calibrated),
            other => Err(format!("unknown stage {other:?}")),
        }
    }
}

/// A series plus a same-length removal mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedSeries {
    pub series: TimeSeries,
    pub removed: Vec<Option<RemovalReason>>,
}

impl MaskedSeries {
    pub fn unmasked(series: TimeSeries) -> Self {
        let removed = vec![None; series.len()];
        Self { series, removed }
    }

    pub fn removed_count(&self) -> usize {
        self.removed.iter().filter(|r| r.is_some()).count()
    }

    fn surviving(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.series
            .points
            .iter()
            .zip(&self.removed)
            .filter(|(_, r)| r.is_none())
            .map(|(p, _)| *p)
    }
}

/// The end of the cleaning chain: values on the original grid with per-row
/// provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CleanSeries {
    pub series: TimeSeries,
    pub stages: Vec<Stage>,
}

/// Marks points whose RH exceeds 80% or whose value leaves the sensor
/// range. The PM and RH series must share the timestamp grid exactly.
pub fn filter_unreliable(
    series: &TimeSeries,
    rh: &TimeSeries,
) -> Result<MaskedSeries, PipelineError> {
    if series.len() != rh.len() {
        return Err(PipelineError::TimestampMismatch {
            index: series.len().min(rh.len()),
        });
    }
    for (index, (a, b)) in series.points.iter().zip(&rh.points).enumerate() {
        if a.0 != b.0 {
            return Err(PipelineError::TimestampMismatch { index });
        }
    }
    let removed = series
        .points
        .iter()
        .zip(&rh.points)
        .map(|(&(_, value), &(_, rh_value))| {
            if !(VALUE_RANGE.0..=VALUE_RANGE.1).contains(&value) {
                Some(RemovalReason::OutOfRange)
            } else if rh_value > RH_LIMIT {
                Some(RemovalReason::HighRh)
            } else {
                None
            }
        })
        .collect();
    Ok(MaskedSeries {
        series: series.clone(),
        removed,
    })
}

/// Marks surviving points strictly outside the fences as outliers. Points at
/// a fence stay.
pub fn remove_outliers(masked: &MaskedSeries, bounds: &IqrBounds<f64>) -> MaskedSeries {
    let mut out = masked.clone();
    for (&(_, value), slot) in out.series.points.iter().zip(&mut out.removed) {
        if slot.is_none() && !bounds.contains(value) {
            *slot = Some(RemovalReason::Outlier);
        }
    }
    out
}

/// Computes fences per UTC calendar month over the surviving points of that
/// month and marks outliers. Months with fewer than four surviving points
/// are passed through untouched.
pub fn remove_outliers_monthly(masked: &MaskedSeries) -> MaskedSeries {
    let mut out = masked.clone();
    let months: Vec<u32> = out.series.points.iter().map(|&(t, _)| month_of(t)).collect();
    let mut unique: Vec<u32> = months.clone();
    unique.sort_unstable();
    unique.dedup();
    for month in unique {
        let window: Vec<f64> = out
            .series
            .points
            .iter()
            .zip(&out.removed)
            .zip(&months)
            .filter(|((_, r), &m)| r.is_none() && m == month)
            .map(|(((_, v), _), _)| *v)
            .collect();
        if window.len() < MIN_WINDOW {
            continue;
        }
        let bounds = iqr_bounds(&window).expect("window validated above");
        for ((&(_, value), slot), &m) in out
            .series
            .points
            .iter()
            .zip(&mut out.removed)
            .zip(&months)
        {
            if m == month && slot.is_none() && !bounds.contains(value) {
                *slot = Some(RemovalReason::Outlier);
            }
        }
    }
    out
}

/// Replaces each removed interior point with the linear interpolant between
/// its nearest surviving neighbors; leading and trailing gaps take the
/// nearest surviving value. The output keeps the input grid exactly.
pub fn interpolate_gaps(masked: &MaskedSeries) -> Result<CleanSeries, PipelineError> {
    let survivors: Vec<(u64, f64)> = masked.surviving().collect();
    if survivors.is_empty() {
        return Err(PipelineError::InsufficientData {
            needed: 1,
            got: 0,
        });
    }
    let mut points = Vec::with_capacity(masked.series.len());
    let mut stages = Vec::with_capacity(masked.series.len());
    let mut next_idx = 0usize;
    for (&(t, value), removed) in masked.series.points.iter().zip(&masked.removed) {
        if removed.is_none() {
            points.push((t, value));
            stages.push(Stage::Clean);
            continue;
        }
        while next_idx < survivors.len() && survivors[next_idx].0 < t {
            next_idx += 1;
        }
        let filled = match (next_idx.checked_sub(1).map(|i| survivors[i]), survivors.get(next_idx)) {
            (Some((t0, v0)), Some(&(t1, v1))) => {
                let w = (t - t0) as f64 / (t1 - t0) as f64;
                v0 + w * (v1 - v0)
            }
            (Some((_, v0)), None) => v0,
            (None, Some(&(_, v1))) => v1,
            (None, None) => unreachable!("survivors is non-empty"),
        };
        points.push((t, filled));
        stages.push(Stage::Interp);
    }
    Ok(CleanSeries {
        series: TimeSeries {
            device_id: masked.series.device_id,
            points,
        },
        stages,
    })
}

/// The full chain: reliability filter, monthly IQR fences, interpolation.
pub fn clean_series(
    series: &TimeSeries,
    rh: &TimeSeries,
) -> Result<(CleanSeries, Vec<Option<RemovalReason>>), PipelineError> {
    let masked = filter_unreliable(series, rh)?;
    let masked = remove_outliers_monthly(&masked);
    let cleaned = interpolate_gaps(&masked)?;
    Ok((cleaned, masked.removed))
}
