//! Two-term exponential decay fitting and the knee-distance rule.
//!
//! The model is `f(x) = a e^(b x) + c e^(d x)`. Fitting runs damped
//! Gauss-Newton (Levenberg-Marquardt) with the analytic Jacobian, restarted
//! from a small set of fast/slow decay-rate pairs; for each start the linear
//! amplitudes `(a, c)` are seeded by solving the 2x2 normal equations with
//! the rates held fixed. Steps are only ever accepted when they reduce the
//! sum of squares, so the final residual cannot exceed the best start's.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::Float;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("x values must not be all equal")]
    ZeroSpan,
    #[error("fit did not converge from any start (best SSE {best_sse})")]
    DidNotConverge { best_sse: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum KneeError {
    #[error("model slope at the origin is zero")]
    FlatModel,
    #[error("model does not decay (both rates non-negative)")]
    NoDecay,
    #[error("slope never falls below the threshold within {0} m")]
    NoKnee(f64),
}

/// `f(x) = a e^(b x) + c e^(d x)`, ordered so `|b| >= |d|` (fast term first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTermExp<F = f64> {
    pub a: F,
    pub b: F,
    pub c: F,
    pub d: F,
    /// Root-mean-square residual over the fitted points.
    pub residual_rmse: F,
}

impl<F: Float> TwoTermExp<F> {
    pub fn eval(&self, x: F) -> F {
        self.a * (self.b * x).exp() + self.c * (self.d * x).exp()
    }

    /// First derivative `f'(x)`.
    pub fn slope(&self, x: F) -> F {
        self.a * self.b * (self.b * x).exp() + self.c * self.d * (self.d * x).exp()
    }
}

fn sse<F: Float>(theta: &[F; 4], xs: &[F], ys: &[F]) -> F {
    let mut acc = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let f = theta[0] * (theta[1] * x).exp() + theta[2] * (theta[3] * x).exp();
        let r = y - f;
        acc = acc + r * r;
    }
    acc
}

/// Solves a 4x4 linear system in place by Gaussian elimination with partial
/// pivoting. Returns `None` for a numerically singular matrix.
fn solve4<F: Float>(mut m: [[F; 4]; 4], mut rhs: [F; 4]) -> Option<[F; 4]> {
    for col in 0..4 {
        let mut pivot = col;
        for row in (col + 1)..4 {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() < F::val(1e-300) {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..4 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] = m[row][k] - factor * m[col][k];
            }
            rhs[row] = rhs[row] - factor * rhs[col];
        }
    }
    let mut out = [F::zero(); 4];
    for col in (0..4).rev() {
        let mut acc = rhs[col];
        for k in (col + 1)..4 {
            acc = acc - m[col][k] * out[k];
        }
        out[col] = acc / m[col][col];
    }
    if out.iter().all(|v| v.is_finite()) {
        Some(out)
    } else {
        None
    }
}

/// Amplitudes minimizing `sum (y - a u - c v)^2` for fixed decay rates,
/// where `u = e^(b x)` and `v = e^(d x)`.
fn amplitudes_for_rates<F: Float>(b: F, d: F, xs: &[F], ys: &[F]) -> (F, F) {
    let mut suu = F::zero();
    let mut suv = F::zero();
    let mut svv = F::zero();
    let mut suy = F::zero();
    let mut svy = F::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let u = (b * x).exp();
        let v = (d * x).exp();
        suu = suu + u * u;
        suv = suv + u * v;
        svv = svv + v * v;
        suy = suy + u * y;
        svy = svy + v * y;
    }
    let det = suu * svv - suv * suv;
    if det.abs() > F::val(1e-12) * (suu * svv).abs().max(F::one()) {
        let a = (suy * svv - svy * suv) / det;
        let c = (suu * svy - suv * suy) / det;
        if a.is_finite() && c.is_finite() {
            return (a, c);
        }
    }
    // Rates nearly identical: split the single-exponential amplitude.
    let denom = suu + F::val(2.0) * suv + svv;
    let amp = if denom > F::zero() {
        (suy + svy) / denom
    } else {
        F::zero()
    };
    (amp, amp)
}

fn levenberg_marquardt<F: Float>(
    mut theta: [F; 4],
    xs: &[F],
    ys: &[F],
    max_iter: usize,
) -> ([F; 4], F) {
    let n = xs.len();
    let mut lambda = F::val(1e-3);
    let mut current = sse(&theta, xs, ys);
    if !current.is_finite() {
        return (theta, F::infinity());
    }
    let tol = F::epsilon() * F::val(100.0);

    for _ in 0..max_iter {
        // Normal equations from the analytic Jacobian.
        let mut h = [[F::zero(); 4]; 4];
        let mut g = [F::zero(); 4];
        for i in 0..n {
            let x = xs[i];
            let eb = (theta[1] * x).exp();
            let ed = (theta[3] * x).exp();
            let f = theta[0] * eb + theta[2] * ed;
            let r = ys[i] - f;
            let j = [eb, theta[0] * x * eb, ed, theta[2] * x * ed];
            for p in 0..4 {
                g[p] = g[p] + j[p] * r;
                for q in p..4 {
                    h[p][q] = h[p][q] + j[p] * j[q];
                }
            }
        }
        for p in 0..4 {
            for q in 0..p {
                h[p][q] = h[q][p];
            }
        }

        let mut improved = false;
        for _ in 0..16 {
            let mut damped = h;
            for p in 0..4 {
                let diag = h[p][p];
                let floor = F::val(1e-12);
                damped[p][p] = diag + lambda * diag.max(floor);
            }
            let Some(step) = solve4(damped, g) else {
                lambda = lambda * F::val(10.0);
                continue;
            };
            let candidate = [
                theta[0] + step[0],
                theta[1] + step[1],
                theta[2] + step[2],
                theta[3] + step[3],
            ];
            let next = sse(&candidate, xs, ys);
            if next.is_finite() && next < current {
                let gain = current - next;
                theta = candidate;
                current = next;
                lambda = (lambda / F::val(3.0)).max(F::val(1e-12));
                improved = true;
                if gain <= tol * (current + F::val(1e-30)) {
                    return (theta, current);
                }
                break;
            }
            lambda = lambda * F::val(10.0);
            if lambda > F::val(1e14) {
                return (theta, current);
            }
        }
        if !improved {
            break;
        }
    }
    (theta, current)
}

/// Fits `f(x) = a e^(b x) + c e^(d x)` to the points by multi-start
/// Levenberg-Marquardt. Needs at least four points and a nonzero x span.
pub fn fit_two_term_exp<F: Float>(xs: &[F], ys: &[F]) -> Result<TwoTermExp<F>, FitError> {
    if xs.len() != ys.len() {
        return Err(FitError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 4 {
        return Err(FitError::InsufficientData {
            needed: 4,
            got: xs.len(),
        });
    }
    if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let xmin = xs.iter().copied().fold(F::infinity(), F::min);
    let xmax = xs.iter().copied().fold(F::neg_infinity(), F::max);
    let span = xmax - xmin;
    if span <= F::zero() {
        return Err(FitError::ZeroSpan);
    }

    // Fast/slow e-folding counts across the x span; covers rate ratios from
    // ~10 to ~1000.
    const STARTS: [(f64, f64); 5] = [
        (20.0, 0.2),
        (5.0, 0.05),
        (50.0, 0.5),
        (10.0, 0.01),
        (2.0, 0.2),
    ];

    let mut best: Option<([F; 4], F)> = None;
    for (fast, slow) in STARTS {
        let b0 = -F::val(fast) / span;
        let d0 = -F::val(slow) / span;
        let (a0, c0) = amplitudes_for_rates(b0, d0, xs, ys);
        let (theta, fit_sse) = levenberg_marquardt([a0, b0, c0, d0], xs, ys, 300);
        if best.as_ref().is_none_or(|(_, s)| fit_sse < *s) {
            best = Some((theta, fit_sse));
        }
    }

    let (theta, fit_sse) = best.expect("at least one start");
    if !fit_sse.is_finite() {
        return Err(FitError::DidNotConverge {
            best_sse: fit_sse.to_f64().unwrap_or(f64::NAN),
        });
    }
    let rmse = (fit_sse / F::val(xs.len())).sqrt();
    let (mut a, mut b, mut c, mut d) = (theta[0], theta[1], theta[2], theta[3]);
    if b.abs() < d.abs() {
        std::mem::swap(&mut a, &mut c);
        std::mem::swap(&mut b, &mut d);
    }
    Ok(TwoTermExp {
        a,
        b,
        c,
        d,
        residual_rmse: rmse,
    })
}

/// Smallest `x` (meters) where the decay has flattened:
/// `|f'(x)| <= threshold * |f'(0)|`, rounded to the nearest 10 m.
///
/// Scans at 1 m resolution and bisects inside the bracketing meter, so
/// non-monotone slopes (mixed-sign amplitudes) still yield the first
/// crossing.
pub fn knee_distance<F: Float>(model: &TwoTermExp<F>, threshold: F) -> Result<F, KneeError> {
    const SCAN_LIMIT_M: f64 = 1e6;
    let slope0 = model.slope(F::zero()).abs();
    if slope0 == F::zero() {
        return Err(KneeError::FlatModel);
    }
    if model.b >= F::zero() && model.d >= F::zero() {
        return Err(KneeError::NoDecay);
    }
    let target = threshold * slope0;
    if slope0 <= target {
        return Ok(F::zero());
    }

    let step = F::one();
    let limit = F::val(SCAN_LIMIT_M);
    let mut prev = F::zero();
    let mut x = step;
    while x <= limit {
        if model.slope(x).abs() <= target {
            // Bisect [prev, x] down to millimeters, then round to 10 m.
            let mut lo = prev;
            let mut hi = x;
            for _ in 0..40 {
                let mid = (lo + hi) / F::val(2.0);
                if model.slope(mid).abs() <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let ten = F::val(10.0);
            return Ok((hi / ten).round() * ten);
        }
        prev = x;
        x = x + step;
    }
    Err(KneeError::NoKnee(SCAN_LIMIT_M))
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 0.4801;
    const B: f64 = -0.0124;
    const C: f64 = 0.7380;
    const D: f64 = -0.0001;

    fn reference_model() -> TwoTermExp<f64> {
        TwoTermExp {
            a: A,
            b: B,
            c: C,
            d: D,
            residual_rmse: 0.0,
        }
    }

    fn reference_samples() -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..=34).map(|i| 50.0 * i as f64).collect();
        let m = reference_model();
        let ys = xs.iter().map(|&x| m.eval(x)).collect();
        (xs, ys)
    }

    #[test]
    fn model_value_at_origin() {
        assert!((reference_model().eval(0.0) - 1.2181).abs() < 1e-12);
    }

    #[test]
    fn recovers_reference_coefficients_from_noiseless_samples() {
        let (xs, ys) = reference_samples();
        let fit = fit_two_term_exp(&xs, &ys).unwrap();
        assert!((fit.a - A).abs() / A.abs() < 1e-3, "a = {}", fit.a);
        assert!((fit.b - B).abs() / B.abs() < 1e-3, "b = {}", fit.b);
        assert!((fit.c - C).abs() / C.abs() < 1e-3, "c = {}", fit.c);
        assert!((fit.d - D).abs() / D.abs() < 1e-3, "d = {}", fit.d);
        assert!(fit.residual_rmse < 1e-9);
    }

    #[test]
    fn single_exponential_data_is_reproduced() {
        // Nested model: the parameterization may split the term but values
        // must match.
        let xs: Vec<f64> = (0..=40).map(|i| 25.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 0.9 * (-0.004 * x).exp()).collect();
        let fit = fit_two_term_exp(&xs, &ys).unwrap();
        assert!(fit.residual_rmse < 1e-8, "rmse {}", fit.residual_rmse);
        for (&x, &y) in xs.iter().zip(&ys) {
            assert!((fit.eval(x) - y).abs() < 1e-6);
        }
    }

    #[test]
    fn refined_residual_no_worse_than_best_start() {
        // Noisy data: LM only accepts improving steps, so the fitted SSE is
        // bounded by every start's initial SSE, in particular the best one.
        let (xs, mut ys) = reference_samples();
        let mut state = 0x9e3779b97f4a7c15u64;
        for y in &mut ys {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let noise = ((state >> 11) as f64 / (1u64 << 53) as f64 - 0.5) * 0.1;
            *y += noise;
        }
        let fit = fit_two_term_exp(&xs, &ys).unwrap();
        let span = 1700.0;
        let starts = [(20.0, 0.2), (5.0, 0.05), (50.0, 0.5), (10.0, 0.01), (2.0, 0.2)];
        let best_start_sse = starts
            .iter()
            .map(|&(f, s)| {
                let b0 = -f / span;
                let d0 = -s / span;
                let (a0, c0) = amplitudes_for_rates(b0, d0, &xs, &ys);
                sse(&[a0, b0, c0, d0], &xs, &ys)
            })
            .fold(f64::INFINITY, f64::min);
        let fitted_sse = fit.residual_rmse.powi(2) * xs.len() as f64;
        assert!(fitted_sse <= best_start_sse + 1e-12);
    }

    #[test]
    fn error_cases() {
        assert!(matches!(
            fit_two_term_exp(&[0.0f64, 1.0], &[1.0, 2.0]),
            Err(FitError::InsufficientData { .. })
        ));
        assert!(matches!(
            fit_two_term_exp(&[1.0f64, 1.0, 1.0, 1.0], &[1.0, 2.0, 3.0, 4.0]),
            Err(FitError::ZeroSpan)
        ));
    }

    /// Independent oracle: solve |f'(x)| = threshold * |f'(0)| by bisection
    /// on a wide bracket, without the scanning code path.
    fn knee_oracle(m: &TwoTermExp<f64>, threshold: f64) -> f64 {
        let target = threshold * m.slope(0.0).abs();
        let (mut lo, mut hi) = (0.0, 1e6);
        assert!(m.slope(hi).abs() < target);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if m.slope(mid).abs() <= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    #[test]
    fn knee_matches_bisection_oracle_on_reference_model() {
        let m = reference_model();
        let knee = knee_distance(&m, 0.1).unwrap();
        let exact = knee_oracle(&m, 0.1);
        assert!((knee - (exact / 10.0).round() * 10.0).abs() < 1e-9);
        // The 10% rule lands near 195 m for these coefficients.
        assert!((exact - 195.0).abs() < 5.0, "exact = {exact}");
        assert_eq!(knee, 200.0);
    }

    #[test]
    fn single_term_knee_closed_form() {
        let m = TwoTermExp {
            a: 0.0,
            b: -0.02,
            c: 0.7,
            d: -0.0005,
            residual_rmse: 0.0,
        };
        // a = 0: |f'(x)| = |c d| e^(d x), threshold crossing at ln(t)/d.
        let knee = knee_distance(&m, 0.1).unwrap();
        let closed = (0.1f64).ln() / m.d;
        assert!((knee - (closed / 10.0).round() * 10.0).abs() < 1e-9);
    }

    #[test]
    fn steeper_fast_decay_moves_knee_inward() {
        let m = reference_model();
        let steeper = TwoTermExp {
            b: 2.0 * B,
            ..reference_model()
        };
        assert!(knee_distance(&steeper, 0.1).unwrap() < knee_distance(&m, 0.1).unwrap());
    }

    #[test]
    fn knee_error_cases() {
        let flat = TwoTermExp {
            a: 0.0,
            b: -1.0,
            c: 5.0,
            d: 0.0,
            residual_rmse: 0.0,
        };
        assert_eq!(knee_distance(&flat, 0.1), Err(KneeError::FlatModel));
        let growing = TwoTermExp {
            a: 1.0,
            b: 0.1,
            c: 1.0,
            d: 0.2,
            residual_rmse: 0.0,
        };
        assert_eq!(knee_distance(&growing, 0.1), Err(KneeError::NoDecay));
    }
}
