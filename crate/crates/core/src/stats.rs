//! Quantiles, 1.5-IQR fences and ordinary least squares.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::Float;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} values, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate fit: regressor has no variance")]
    DegenerateFit,
}

/// Quantile by linear interpolation of order statistics (the common
/// "type 7" estimator: position `h = (n - 1) * p` on the sorted sample).
///
/// `sorted` must be ascending; `p` in [0, 1].
pub fn quantile_sorted<F: Float>(sorted: &[F], p: F) -> F {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = F::val(n - 1) * p;
    let lo = h.floor();
    let idx = lo.to_usize().unwrap_or(0).min(n - 1);
    if idx + 1 == n {
        return sorted[n - 1];
    }
    sorted[idx] + (h - lo) * (sorted[idx + 1] - sorted[idx])
}

/// Quartiles plus the 1.5-IQR decision fences used for outlier detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqrBounds<F = f64> {
    pub q1: F,
    pub q3: F,
    pub iqr: F,
    pub lower: F,
    pub upper: F,
}

impl<F: Float> IqrBounds<F> {
    /// A value is kept when it lies inside the fences; both fences are
    /// inclusive.
    pub fn contains(&self, v: F) -> bool {
        v >= self.lower && v <= self.upper
    }
}

/// Computes quartiles and fences from at least four finite values.
pub fn iqr_bounds<F: Float>(values: &[F]) -> Result<IqrBounds<F>, StatsError> {
    if values.len() < 4 {
        return Err(StatsError::InsufficientData {
            needed: 4,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let q1 = quantile_sorted(&sorted, F::val(0.25));
    let q3 = quantile_sorted(&sorted, F::val(0.75));
    let iqr = q3 - q1;
    let mult = F::val(1.5);
    Ok(IqrBounds {
        q1,
        q3,
        iqr,
        lower: q1 - mult * iqr,
        upper: q3 + mult * iqr,
    })
}

/// Population mean and variance (divide by `n`). `None` on empty input.
pub fn mean_variance<F: Float>(values: &[F]) -> Option<(F, F)> {
    if values.is_empty() {
        return None;
    }
    let n = F::val(values.len());
    let mean = values.iter().fold(F::zero(), |s, &v| s + v) / n;
    let var = values
        .iter()
        .fold(F::zero(), |s, &v| s + (v - mean) * (v - mean))
        / n;
    Some((mean, var))
}

/// Ordinary least-squares line `y = slope * x + intercept`, with residual
/// RMSE and the usual standard errors of both coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<F = f64> {
    pub slope: F,
    pub intercept: F,
    pub rmse: F,
    pub se_slope: F,
    pub se_intercept: F,
    pub n: usize,
}

impl<F: Float> LinearFit<F> {
    pub fn eval(&self, x: F) -> F {
        self.slope * x + self.intercept
    }
}

/// Fits `y = m x + c` by least squares. Errors when fewer than two points
/// are given or `x` has no variance.
pub fn fit_line<F: Float>(x: &[F], y: &[F]) -> Result<LinearFit<F>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::InsufficientData {
            needed: 2,
            got: x.len(),
        });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = F::val(x.len());
    let mean_x = x.iter().fold(F::zero(), |s, &v| s + v) / n;
    let mean_y = y.iter().fold(F::zero(), |s, &v| s + v) / n;
    let mut sxx = F::zero();
    let mut sxy = F::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx = sxx + (xi - mean_x) * (xi - mean_x);
        sxy = sxy + (xi - mean_x) * (yi - mean_y);
    }
    if sxx <= F::zero() {
        return Err(StatsError::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let mut sse = F::zero();
    let mut sum_x2 = F::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let r = yi - (slope * xi + intercept);
        sse = sse + r * r;
        sum_x2 = sum_x2 + xi * xi;
    }
    let rmse = (sse / n).sqrt();
    // Residual variance with two fitted parameters; zero for n == 2.
    let dof = x.len().saturating_sub(2);
    let (se_slope, se_intercept) = if dof == 0 {
        (F::zero(), F::zero())
    } else {
        let s2 = sse / F::val(dof);
        let se_m = (s2 / sxx).sqrt();
        let se_c = (s2 * sum_x2 / (n * sxx)).sqrt();
        (se_m, se_c)
    };
    Ok(LinearFit {
        slope,
        intercept,
        rmse,
        se_slope,
        se_intercept,
        n: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_array_collapses_fences() {
        let b = iqr_bounds(&[5.0f64, 5.0, 5.0, 5.0]).unwrap();
        assert_eq!(b.q1, 5.0);
        assert_eq!(b.q3, 5.0);
        assert_eq!(b.lower, 5.0);
        assert_eq!(b.upper, 5.0);
    }

    #[test]
    fn eight_point_reference_values() {
        let b = iqr_bounds(&[1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        assert_eq!(b.q1, 2.75);
        assert_eq!(b.q3, 6.25);
        assert_eq!(b.iqr, 3.5);
        assert_eq!(b.lower, -2.5);
        assert_eq!(b.upper, 11.5);
    }

    #[test]
    fn too_few_values_is_an_error() {
        assert_eq!(
            iqr_bounds(&[1.0f64, 2.0, 3.0]),
            Err(StatsError::InsufficientData { needed: 4, got: 3 })
        );
    }

    #[test]
    fn fences_bracket_the_median() {
        let vals = [9.0f64, 1.0, 4.0, 7.0, 2.0, 8.0, 3.0];
        let b = iqr_bounds(&vals).unwrap();
        let mut sorted = vals.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = quantile_sorted(&sorted, 0.5);
        assert!(b.lower <= median && median <= b.upper);
    }

    #[test]
    fn mean_variance_is_population() {
        let (mean, var) = mean_variance(&[10.0f64, 20.0]).unwrap();
        assert_eq!(mean, 15.0);
        assert_eq!(var, 25.0);
        let (_, var) = mean_variance(&[3.0f64, 3.0, 3.0]).unwrap();
        assert_eq!(var, 0.0);
    }

    #[test]
    fn exact_affine_recovery() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 5.0).collect();
        let fit = fit_line(&x, &y).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 5.0).abs() < 1e-12);
        assert!(fit.rmse < 1e-12);
    }

    #[test]
    fn constant_regressor_is_degenerate() {
        let x = [4.0f64, 4.0, 4.0];
        let y = [1.0f64, 2.0, 3.0];
        assert_eq!(fit_line(&x, &y), Err(StatsError::DegenerateFit));
    }

    /// Independent type-7 oracle: the formula applied directly to a sorted
    /// copy, written without reusing the implementation above.
    fn type7_oracle(values: &[f64], p: f64) -> f64 {
        let mut s = values.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (s.len() as f64 - 1.0) * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    }

    proptest! {
        #[test]
        fn iqr_matches_brute_force_oracle(values in proptest::collection::vec(-1e3f64..1e3, 4..50)) {
            let b = iqr_bounds(&values).unwrap();
            let q1 = type7_oracle(&values, 0.25);
            let q3 = type7_oracle(&values, 0.75);
            prop_assert!((b.q1 - q1).abs() <= 1e-12);
            prop_assert!((b.q3 - q3).abs() <= 1e-12);
            prop_assert!((b.lower - (q1 - 1.5 * (q3 - q1))).abs() <= 1e-12);
            prop_assert!((b.upper - (q3 + 1.5 * (q3 - q1))).abs() <= 1e-12);
        }

        #[test]
        fn fences_never_exclude_data_inside_quartiles(values in proptest::collection::vec(-1e3f64..1e3, 4..50)) {
            let b = iqr_bounds(&values).unwrap();
            for v in values {
                if v >= b.q1 && v <= b.q3 {
                    prop_assert!(b.contains(v));
                }
            }
        }
    }
}
