//! Inverse distance weighting over geographic sample points.

use thiserror::Error;

use crate::float::Float;
use crate::geo::GeoPoint;

/// Below this separation a target is treated as coincident with a sample and
/// takes its value exactly, avoiding the `d^-p` singularity.
pub const COINCIDENT_DISTANCE_M: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum IdwError {
    #[error("no samples to interpolate from")]
    NoSamples,
    #[error("power must be positive, got {0}")]
    InvalidPower(f64),
}

/// Interpolates a value at `target` as `sum(w_i v_i) / sum(w_i)` with
/// `w_i = d_i^-power` over haversine distances in meters.
///
/// Samples are accumulated in input order, so results are reproducible
/// bit-for-bit for a fixed sample order. If any sample lies within
/// [`COINCIDENT_DISTANCE_M`] of the target, the first such sample's value is
/// returned exactly.
pub fn idw<F: Float>(
    samples: &[(GeoPoint<F>, F)],
    target: GeoPoint<F>,
    power: F,
) -> Result<F, IdwError> {
    if samples.is_empty() {
        return Err(IdwError::NoSamples);
    }
    if power <= F::zero() {
        return Err(IdwError::InvalidPower(power.to_f64().unwrap_or(f64::NAN)));
    }
    let snap = F::val(COINCIDENT_DISTANCE_M);
    let mut num = F::zero();
    let mut den = F::zero();
    for (point, value) in samples {
        let d = point.haversine(&target);
        if d < snap {
            return Ok(*value);
        }
        let w = d.powf(-power);
        num = num + w * *value;
        den = den + w;
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::EARTH_RADIUS_M;
    use proptest::prelude::*;

    /// Point exactly `meters` north of `(0, 0)` along the meridian, where the
    /// haversine arc is exact.
    fn north_of_origin(meters: f64) -> GeoPoint<f64> {
        GeoPoint {
            lat: (meters / EARTH_RADIUS_M).to_degrees(),
            lon: 0.0,
        }
    }

    #[test]
    fn coincident_sample_wins() {
        let target = GeoPoint { lat: 0.0, lon: 0.0 };
        let samples = vec![
            (north_of_origin(250.0), 10.0),
            (target, 42.0),
            (north_of_origin(500.0), 99.0),
        ];
        assert_eq!(idw(&samples, target, 2.0).unwrap(), 42.0);
    }

    #[test]
    fn equidistant_samples_average() {
        let target = GeoPoint { lat: 0.0, lon: 0.0 };
        let samples = vec![(north_of_origin(300.0), 10.0), (north_of_origin(-300.0), 20.0)];
        let v = idw(&samples, target, 2.0).unwrap();
        assert!((v - 15.0).abs() < 1e-9);
    }

    #[test]
    fn three_sample_reference_value() {
        // Distances 100/200/400 m with p = 2 weight as 16:4:1, so
        // (16*10 + 4*20 + 1*40) / 21.
        let target = GeoPoint { lat: 0.0, lon: 0.0 };
        let samples = vec![
            (north_of_origin(100.0), 10.0),
            (north_of_origin(200.0), 20.0),
            (north_of_origin(400.0), 40.0),
        ];
        let v = idw(&samples, target, 2.0).unwrap();
        assert!((v - 280.0 / 21.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn empty_and_bad_power_error() {
        let target = GeoPoint { lat: 0.0, lon: 0.0 };
        assert_eq!(idw::<f64>(&[], target, 2.0), Err(IdwError::NoSamples));
        let samples = vec![(north_of_origin(10.0), 1.0)];
        assert_eq!(
            idw(&samples, target, 0.0),
            Err(IdwError::InvalidPower(0.0))
        );
    }

    proptest! {
        /// Convex combination: output bounded by sample extremes.
        #[test]
        fn bounded_by_sample_values(
            offsets in proptest::collection::vec((-900.0f64..900.0, -900.0f64..900.0, 0.0f64..500.0), 1..12),
            tx in -400.0f64..400.0,
            ty in -400.0f64..400.0,
            p in 0.5f64..4.0,
        ) {
            let samples: Vec<(GeoPoint<f64>, f64)> = offsets
                .iter()
                .map(|(dn, de, v)| {
                    (GeoPoint {
                        lat: (dn / EARTH_RADIUS_M).to_degrees(),
                        lon: (de / EARTH_RADIUS_M).to_degrees(),
                    }, *v)
                })
                .collect();
            let target = GeoPoint {
                lat: (tx / EARTH_RADIUS_M).to_degrees(),
                lon: (ty / EARTH_RADIUS_M).to_degrees(),
            };
            let v = idw(&samples, target, p).unwrap();
            let lo = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            let hi = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9, "{v} outside [{lo}, {hi}]");
        }
    }
}
