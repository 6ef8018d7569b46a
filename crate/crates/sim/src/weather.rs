//! Temperature and relative-humidity traces.
//!
//! Sinusoidal daily cycles around a season-dependent mean with additive
//! Gaussian noise. Monsoon humidity means sit high enough that readings
//! regularly cross the 80% reliability threshold downstream filters look
//! for.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use airnet_core::season::{PerSeason, Season};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DailyCycle {
    pub mean: PerSeason<f64>,
    pub amplitude: f64,
    /// Hour of day at which the cycle peaks.
    pub peak_hr: f64,
    pub noise_sigma: f64,
}

impl DailyCycle {
    fn value<R: Rng>(&self, t: u64, season: Season, rng: &mut R) -> f64 {
        let hour = (t % 86_400) as f64 / 3_600.0;
        let z: f64 = rng.sample(StandardNormal);
        self.mean.get(season)
            + self.amplitude * (std::f64::consts::TAU * (hour - self.peak_hr) / 24.0).cos()
            + z * self.noise_sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherModel {
    pub temperature: DailyCycle,
    pub humidity: DailyCycle,
}

impl Default for WeatherModel {
    fn default() -> Self {
        Self {
            temperature: DailyCycle {
                mean: PerSeason { monsoon: 27.0, winter: 18.0, summer: 34.0 },
                amplitude: 5.0,
                peak_hr: 14.0,
                noise_sigma: 0.4,
            },
            humidity: DailyCycle {
                mean: PerSeason { monsoon: 74.0, winter: 55.0, summer: 38.0 },
                amplitude: 12.0,
                peak_hr: 4.0,
                noise_sigma: 2.0,
            },
        }
    }
}

impl WeatherModel {
    /// (temperature °C, relative humidity %) at time `t`. Consumes exactly
    /// two normal draws from `rng`.
    pub fn sample<R: Rng>(&self, t: u64, season: Season, rng: &mut R) -> (f64, f64) {
        let temp = self.temperature.value(t, season, rng);
        let rh = self.humidity.value(t, season, rng).clamp(0.0, 100.0);
        (temp, rh)
    }
}
