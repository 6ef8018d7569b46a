//! Per-sensor, per-season affine calibration.
//!
//! The sensor error lives on the raw side (`raw = alpha * truth + beta +
//! noise`), so the regression runs raw-on-reference — where the noisy
//! variable is the response — and the calibration map is the inverse affine:
//! `m = 1/alpha_hat`, `c = -beta_hat/alpha_hat`. Regressing the other way
//! round would attenuate the slope by the noise-to-signal ratio and bias
//! every calibrated value. `fit_rmse` is the residual RMSE of the
//! regression, i.e. an estimate of the sensor noise.

use serde::{Deserialize, Serialize};

pub use airnet_core::pollutant::Pollutant;
use airnet_core::season::{Season, SeasonCalendar};
use airnet_core::stats::fit_line;

use crate::{month_of, PipelineError, TimeSeries};

/// `calibrated = m * raw + c` for one device, season and pollutant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub device_id: u16,
    pub season: Season,
    pub pollutant: Pollutant,
    pub m: f64,
    pub c: f64,
    pub fit_rmse: f64,
    pub n_points: usize,
}

/// A fitted model with delta-method standard errors on `(m, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationFit {
    pub model: CalibrationModel,
    pub se_m: f64,
    pub se_c: f64,
}

/// Fits the calibration map from a co-location window. `raw` and
/// `reference` must share the timestamp grid.
pub fn fit_calibration(
    raw: &TimeSeries,
    reference: &TimeSeries,
    season: Season,
    pollutant: Pollutant,
) -> Result<CalibrationFit, PipelineError> {
    if raw.len() != reference.len() {
        return Err(PipelineError::TimestampMismatch {
            index: raw.len().min(reference.len()),
        });
    }
    for (index, (a, b)) in raw.points.iter().zip(&reference.points).enumerate() {
        if a.0 != b.0 {
            return Err(PipelineError::TimestampMismatch { index });
        }
    }
    if raw.len() < 2 {
        return Err(PipelineError::InsufficientData {
            needed: 2,
            got: raw.len(),
        });
    }

    let x = reference.values();
    let y = raw.values();
    let forward = fit_line(&x, &y).map_err(|e| PipelineError::DegenerateFit(e.to_string()))?;
    let alpha = forward.slope;
    if alpha.abs() < 1e-12 {
        return Err(PipelineError::DegenerateFit(
            "raw signal does not respond to the reference".into(),
        ));
    }
    if alpha < 0.0 {
        return Err(PipelineError::DegenerateFit(
            "raw signal is anti-correlated with the reference".into(),
        ));
    }
    let beta = forward.intercept;
    let m = 1.0 / alpha;
    let c = -beta / alpha;

    // Delta method through (m, c) = (1/a, -b/a); cov(a_hat, b_hat) for OLS
    // is -mean(x) * se_a^2.
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let var_a = forward.se_slope * forward.se_slope;
    let var_b = forward.se_intercept * forward.se_intercept;
    let cov_ab = -mean_x * var_a;
    let se_m = (var_a / alpha.powi(4)).sqrt();
    let dc_da = beta / (alpha * alpha);
    let dc_db = -1.0 / alpha;
    let var_c = dc_da * dc_da * var_a + dc_db * dc_db * var_b + 2.0 * dc_da * dc_db * cov_ab;
    let se_c = var_c.max(0.0).sqrt();

    Ok(CalibrationFit {
        model: CalibrationModel {
            device_id: raw.device_id,
            season,
            pollutant,
            m,
            c,
            fit_rmse: forward.rmse,
            n_points: raw.len(),
        },
        se_m,
        se_c,
    })
}

/// Applies the calibration map pointwise, clamping below at zero (an affine
/// map can push clean-air values slightly negative). Every point must fall
/// in the model's season.
pub fn apply_calibration(
    series: &TimeSeries,
    model: &CalibrationModel,
    calendar: &SeasonCalendar,
) -> Result<TimeSeries, PipelineError> {
    for &(t, _) in &series.points {
        let found = calendar.season_for_month(month_of(t));
        if found != model.season {
            return Err(PipelineError::SeasonMismatch {
                expected: model.season,
                found,
                at: t,
            });
        }
    }
    Ok(TimeSeries {
        device_id: series.device_id,
        points: series
            .points
            .iter()
            .map(|&(t, v)| (t, (model.m * v + model.c).max(0.0)))
            .collect(),
    })
}
