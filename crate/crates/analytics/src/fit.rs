//! Correlation-decay fit and the deployment-spacing knee.

use serde::Serialize;

use airnet_core::expfit::{fit_two_term_exp, knee_distance};
use airnet_core::ExpFit;

use crate::correlation::CorrelationPoint;
use crate::AnalyticsError;

const MIN_POINTS: usize = 8;
const MIN_SPAN_M: f64 = 500.0;

/// Result of fitting `tau(d) = a e^(b d) + c e^(d d)` to the pair cloud.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub residual_rmse: f64,
    /// Distance where the decay slope falls to `knee_threshold` of its value
    /// at zero, rounded to 10 m.
    pub knee_m: f64,
    pub knee_threshold: f64,
    pub n_points: usize,
    /// Width of the distance bins when the fit ran on binned means.
    pub bin_width_m: Option<f64>,
}

impl DecayFit {
    pub fn model(&self) -> ExpFit {
        ExpFit {
            a: self.a,
            b: self.b,
            c: self.c,
            d: self.d,
            residual_rmse: self.residual_rmse,
        }
    }
}

/// Mean tau per distance bin, placed at the bin center.
fn bin_points(points: &[CorrelationPoint], width_m: f64) -> Vec<(f64, f64)> {
    use std::collections::BTreeMap;
    let mut bins: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for p in points {
        let idx = (p.distance_m / width_m).floor() as i64;
        let slot = bins.entry(idx).or_insert((0.0, 0));
        slot.0 += p.tau;
        slot.1 += 1;
    }
    bins.into_iter()
        .map(|(idx, (sum, n))| ((idx as f64 + 0.5) * width_m, sum / n as f64))
        .collect()
}

/// Fits the two-term exponential to correlation-versus-distance points
/// (optionally binned first) and evaluates the knee rule on the fit.
pub fn fit_correlation_decay(
    points: &[CorrelationPoint],
    knee_threshold: f64,
    bin_width_m: Option<f64>,
) -> Result<DecayFit, AnalyticsError> {
    let raw: Vec<(f64, f64)> = match bin_width_m {
        Some(width) => bin_points(points, width),
        None => points.iter().map(|p| (p.distance_m, p.tau)).collect(),
    };
    let span = raw.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max)
        - raw.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if raw.len() < MIN_POINTS || !(span >= MIN_SPAN_M) {
        return Err(AnalyticsError::InsufficientSpan {
            points: raw.len(),
            span_m: if span.is_finite() { span } else { 0.0 },
            min_points: MIN_POINTS,
            min_span_m: MIN_SPAN_M,
        });
    }
    let xs: Vec<f64> = raw.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = raw.iter().map(|p| p.1).collect();
    let model = fit_two_term_exp(&xs, &ys)?;
    let knee_m = knee_distance(&model, knee_threshold)?;
    Ok(DecayFit {
        a: model.a,
        b: model.b,
        c: model.c,
        d: model.d,
        residual_rmse: model.residual_rmse,
        knee_m,
        knee_threshold,
        n_points: raw.len(),
        bin_width_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_points(step_m: f64, max_m: f64) -> Vec<CorrelationPoint> {
        let model = ExpFit {
            a: 0.4801,
            b: -0.0124,
            c: 0.7380,
            d: -0.0001,
            residual_rmse: 0.0,
        };
        let mut out = Vec::new();
        let mut d = 0.0;
        let mut id = 0u16;
        while d <= max_m {
            id += 1;
            out.push(CorrelationPoint {
                device_a: id,
                device_b: id + 1,
                distance_m: d,
                tau: model.eval(d),
                n_samples: 72,
            });
            d += step_m;
        }
        out
    }

    #[test]
    fn recovers_the_reference_decay_within_a_part_per_thousand() {
        let fit = fit_correlation_decay(&reference_points(50.0, 1_700.0), 0.1, None).unwrap();
        assert!((fit.a - 0.4801).abs() / 0.4801 < 1e-3);
        assert!((fit.b + 0.0124).abs() / 0.0124 < 1e-3);
        assert!((fit.c - 0.7380).abs() / 0.7380 < 1e-3);
        assert!((fit.d + 0.0001).abs() / 0.0001 < 1e-3);
        assert!(fit.residual_rmse < 1e-9);
        assert_eq!(fit.knee_m, 200.0);
    }

    #[test]
    fn binning_collapses_the_cloud_before_fitting() {
        let mut points = reference_points(10.0, 1_700.0);
        // Duplicate each point with symmetric jitter; bin means cancel it.
        let jittered: Vec<CorrelationPoint> = points
            .iter()
            .flat_map(|p| {
                [0.03, -0.03].map(|j| CorrelationPoint {
                    tau: p.tau + j,
                    ..*p
                })
            })
            .collect();
        points = jittered;
        let fit = fit_correlation_decay(&points, 0.1, Some(100.0)).unwrap();
        assert!(fit.bin_width_m.is_some());
        assert!(fit.residual_rmse < 0.02);
        // The coefficients can trade off (the parameterization is sloppy);
        // the curve itself must match the reference closely over the binned
        // support (bin centers run from 50 m).
        let reference = ExpFit { a: 0.4801, b: -0.0124, c: 0.7380, d: -0.0001, residual_rmse: 0.0 };
        for step in 1..=16 {
            let x = step as f64 * 100.0;
            let err = (fit.model().eval(x) - reference.eval(x)).abs();
            assert!(err < 0.02, "curve off by {err} at {x}");
        }
    }

    #[test]
    fn too_few_or_too_narrow_points_error() {
        let few = reference_points(50.0, 300.0);
        assert!(matches!(
            fit_correlation_decay(&few[..6], 0.1, None),
            Err(AnalyticsError::InsufficientSpan { .. })
        ));
        let narrow = reference_points(10.0, 400.0);
        assert!(matches!(
            fit_correlation_decay(&narrow, 0.1, None),
            Err(AnalyticsError::InsufficientSpan { .. })
        ));
    }

    #[test]
    fn report_serializes_to_json() {
        let fit = fit_correlation_decay(&reference_points(50.0, 1_700.0), 0.1, None).unwrap();
        let json = serde_json::to_string(&fit).unwrap();
        assert!(json.contains("\"knee_m\":200.0"));
    }
}
