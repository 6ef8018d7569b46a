//! Low-cost sensor error model.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Hardware reporting range of the PM sensor, µg/m³.
pub const SENSOR_RANGE_MIN: f64 = 0.0;
pub const SENSOR_RANGE_MAX: f64 = 999.9;

/// Affine gain/offset error with Gaussian noise and a multiplicative
/// inflation when relative humidity exceeds 80% (light-scattering sensors
/// over-read in near-condensing air). Output clamps to the hardware range.
/// Fields omitted in configuration fall back to the identity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorErrorModel {
    pub alpha: f64,
    pub beta: f64,
    pub noise_sigma: f64,
    pub rh_inflation: f64,
}

impl Default for SensorErrorModel {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.0,
            noise_sigma: 0.0,
            rh_inflation: 1.0,
        }
    }
}

impl SensorErrorModel {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0) {
            return Err(format!("sensor alpha must be positive, got {}", self.alpha));
        }
        if self.noise_sigma < 0.0 {
            return Err(format!(
                "sensor noise_sigma must be non-negative, got {}",
                self.noise_sigma
            ));
        }
        if self.rh_inflation < 1.0 {
            return Err(format!(
                "sensor rh_inflation must be >= 1, got {}",
                self.rh_inflation
            ));
        }
        Ok(())
    }

    /// Raw sensor output for a true concentration under the given RH.
    /// Always consumes exactly one normal draw from `rng`.
    pub fn sample<R: Rng>(&self, truth: f64, rh: f64, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let mut raw = self.alpha * truth + self.beta + z * self.noise_sigma;
        if rh > 80.0 {
            raw *= self.rh_inflation;
        }
        raw.clamp(SENSOR_RANGE_MIN, SENSOR_RANGE_MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(1)
    }

    #[test]
    fn identity_model_passes_truth_through() {
        let m = SensorErrorModel::default();
        assert_eq!(m.sample(37.2, 50.0, &mut rng()), 37.2);
    }

    #[test]
    fn affine_model_applies_gain_and_offset() {
        let m = SensorErrorModel {
            alpha: 2.0,
            beta: 5.0,
            ..Default::default()
        };
        assert_eq!(m.sample(10.0, 50.0, &mut rng()), 25.0);
    }

    #[test]
    fn clamps_to_hardware_range() {
        let m = SensorErrorModel::default();
        assert_eq!(m.sample(1_500.0, 50.0, &mut rng()), 999.9);
        let m = SensorErrorModel {
            beta: -100.0,
            ..Default::default()
        };
        assert_eq!(m.sample(10.0, 50.0, &mut rng()), 0.0);
    }

    #[test]
    fn high_humidity_inflates_the_reading() {
        let m = SensorErrorModel {
            rh_inflation: 1.3,
            ..Default::default()
        };
        assert_eq!(m.sample(100.0, 81.0, &mut rng()), 130.0);
        assert_eq!(m.sample(100.0, 80.0, &mut rng()), 100.0);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let m = SensorErrorModel {
            noise_sigma: 3.0,
            ..Default::default()
        };
        let a = m.sample(50.0, 50.0, &mut rng());
        let b = m.sample(50.0, 50.0, &mut rng());
        assert_eq!(a, b);
        assert_ne!(a, 50.0);
    }

    #[test]
    fn validation_catches_bad_parameters() {
        assert!(SensorErrorModel { alpha: 0.0, ..Default::default() }.validate().is_err());
        assert!(SensorErrorModel { noise_sigma: -1.0, ..Default::default() }.validate().is_err());
        assert!(SensorErrorModel { rh_inflation: 0.5, ..Default::default() }.validate().is_err());
    }
}
