//! Cleaning and calibration pipeline.
//!
//! Turns raw per-device series into analysis-ready ones: reliability
//! filtering (RH > 80% or out-of-range values), monthly IQR outlier removal,
//! linear gap interpolation, per-sensor per-season affine calibration and
//! seasonal statistics. Every stage is a pure function; the timestamp grid
//! of the input is preserved end to end.

pub mod calibrate;
pub mod clean;
pub mod io;
pub mod stats;

pub use calibrate::{apply_calibration, fit_calibration, CalibrationFit, CalibrationModel, Pollutant};
pub use clean::{
    clean_series, filter_unreliable, interpolate_gaps, remove_outliers, remove_outliers_monthly,
    CleanSeries, MaskedSeries, RemovalReason, Stage,
};
pub use stats::seasonal_stats;

use thiserror::Error;

/// A single-quantity series on a strictly increasing timestamp grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub device_id: u16,
    pub points: Vec<(u64, f64)>,
}

impl TimeSeries {
    pub fn new(device_id: u16, points: Vec<(u64, f64)>) -> Result<Self, PipelineError> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(PipelineError::UnsortedSeries);
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return Err(PipelineError::NonFinite);
        }
        Ok(Self { device_id, points })
    }

    pub fn timestamps(&self) -> impl Iterator<Item = u64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("series timestamps are not strictly increasing")]
    UnsortedSeries,
    #[error("series contains a non-finite value")]
    NonFinite,
    #[error("timestamp grids differ at index {index}")]
    TimestampMismatch { index: usize },
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("model is for {expected} but the series contains {found} data at {at}")]
    SeasonMismatch {
        expected: airnet_core::season::Season,
        found: airnet_core::season::Season,
        at: u64,
    },
    #[error("csv: {0}")]
    Csv(String),
}

/// UTC calendar month (1..=12) of an epoch timestamp.
pub(crate) fn month_of(t: u64) -> u32 {
    use chrono::Datelike;
    chrono::DateTime::from_timestamp(t as i64, 0)
        .expect("timestamp in range")
        .month()
}
