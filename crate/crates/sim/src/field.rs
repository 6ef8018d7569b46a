//! Synthetic ground-truth PM field.
//!
//! The field is a sum of a seasonal baseline, diurnal harmonics, transient
//! plume events (Gaussian in space, linear ramp in time) and a smooth
//! spatio-temporal texture built from seeded random Fourier features. The
//! texture gives the field a controllable spatial correlation length without
//! storing a raster: evaluation is O(features) per point and deterministic
//! for a fixed seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use airnet_core::season::{PerSeason, SeasonCalendar};
use airnet_core::{Bbox, Point};

use crate::month_of;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("location ({lat}, {lon}) outside the field region")]
    OutOfRegion { lat: f64, lon: f64 },
    #[error("invalid field configuration: {0}")]
    Invalid(String),
}

/// One diurnal harmonic; entry `i` of the list oscillates at `i + 1` cycles
/// per day: `amplitude * cos(2 pi (i+1) (hour - phase_hr) / 24)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub phase_hr: f64,
    pub amplitude: f64,
}

/// A transient pollution plume: Gaussian kernel of scale `sigma_m` around
/// `center`, ramping linearly from `start` up to `peak_time` and back down
/// to `end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlumeEvent {
    pub center: Point,
    pub sigma_m: f64,
    /// Peak contribution at the center, µg/m³.
    pub peak: f64,
    pub start: u64,
    pub peak_time: u64,
    pub end: u64,
}

impl PlumeEvent {
    pub fn validate(&self) -> Result<(), FieldError> {
        self.center
            .validate()
            .map_err(|e| FieldError::Invalid(e.to_string()))?;
        if !(self.sigma_m > 0.0) {
            return Err(FieldError::Invalid(format!(
                "event sigma_m must be positive, got {}",
                self.sigma_m
            )));
        }
        if self.peak < 0.0 {
            return Err(FieldError::Invalid(format!(
                "event peak must be non-negative, got {}",
                self.peak
            )));
        }
        if !(self.start < self.peak_time && self.peak_time < self.end) {
            return Err(FieldError::Invalid(
                "event times must satisfy start < peak_time < end".into(),
            ));
        }
        Ok(())
    }

    /// Temporal ramp in [0, 1]; zero outside `[start, end]`.
    fn ramp(&self, t: u64) -> f64 {
        if t < self.start || t > self.end {
            return 0.0;
        }
        if t <= self.peak_time {
            (t - self.start) as f64 / (self.peak_time - self.start) as f64
        } else {
            (self.end - t) as f64 / (self.end - self.peak_time) as f64
        }
    }

    fn contribution(&self, loc: &Point, t: u64) -> f64 {
        let ramp = self.ramp(t);
        if ramp == 0.0 {
            return 0.0;
        }
        let d = self.center.haversine(loc);
        self.peak * ramp * (-0.5 * (d / self.sigma_m).powi(2)).exp()
    }

    /// Upper bound on |d contribution / dt| in µg/m³ per second.
    fn slope_bound(&self) -> f64 {
        let up = self.peak / (self.peak_time - self.start) as f64;
        let down = self.peak / (self.end - self.peak_time) as f64;
        up.max(down)
    }
}

/// Parameters of the random-Fourier-feature texture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureParams {
    /// Spatial correlation length in meters.
    pub length_scale_m: f64,
    /// Standard deviation of the texture in µg/m³.
    pub amplitude: f64,
    /// Temporal correlation scale in seconds.
    pub time_scale_s: f64,
    pub seed: u64,
    /// Number of Fourier features; more features, smoother statistics.
    pub features: usize,
}

impl TextureParams {
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.length_scale_m > 0.0) {
            return Err(FieldError::Invalid("texture length_scale_m must be positive".into()));
        }
        if self.amplitude < 0.0 {
            return Err(FieldError::Invalid("texture amplitude must be non-negative".into()));
        }
        if !(self.time_scale_s > 0.0) {
            return Err(FieldError::Invalid("texture time_scale_s must be positive".into()));
        }
        if self.features == 0 {
            return Err(FieldError::Invalid("texture needs at least one feature".into()));
        }
        Ok(())
    }
}

/// Frozen random Fourier features: `amp * sqrt(2/K) * sum cos(w . (e, n, t) + phi)`
/// with spatial frequencies drawn as N(0, 1/len^2) and temporal as
/// N(0, 1/tau^2), which approximates a Gaussian-kernel random field.
#[derive(Debug, Clone)]
struct Texture {
    freqs: Vec<(f64, f64, f64)>,
    phases: Vec<f64>,
    scale: f64,
}

impl Texture {
    fn new(params: &TextureParams) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
        let mut freqs = Vec::with_capacity(params.features);
        let mut phases = Vec::with_capacity(params.features);
        for _ in 0..params.features {
            let wx: f64 = rng.sample::<f64, _>(StandardNormal) / params.length_scale_m;
            let wy: f64 = rng.sample::<f64, _>(StandardNormal) / params.length_scale_m;
            let wt: f64 = rng.sample::<f64, _>(StandardNormal) / params.time_scale_s;
            freqs.push((wx, wy, wt));
            phases.push(rng.random_range(0.0..std::f64::consts::TAU));
        }
        Texture {
            freqs,
            phases,
            scale: params.amplitude * (2.0 / params.features as f64).sqrt(),
        }
    }

    fn eval(&self, east: f64, north: f64, t: f64) -> f64 {
        let mut acc = 0.0;
        for ((wx, wy, wt), phi) in self.freqs.iter().zip(&self.phases) {
            acc += (wx * east + wy * north + wt * t + phi).cos();
        }
        self.scale * acc
    }

    fn time_slope_bound(&self) -> f64 {
        self.scale * self.freqs.iter().map(|f| f.2.abs()).sum::<f64>()
    }
}

/// The analytic ground-truth field over a bounded region.
#[derive(Debug, Clone)]
pub struct TruthField {
    bbox: Bbox,
    baseline: PerSeason<f64>,
    calendar: SeasonCalendar,
    diurnal: Vec<Harmonic>,
    events: Vec<PlumeEvent>,
    pm25_ratio: f64,
    texture_pm10: Option<Texture>,
    texture_pm25: Option<Texture>,
}

impl TruthField {
    pub fn new(
        bbox: Bbox,
        baseline: PerSeason<f64>,
        calendar: SeasonCalendar,
        diurnal: Vec<Harmonic>,
        events: Vec<PlumeEvent>,
        pm25_ratio: f64,
        texture: Option<TextureParams>,
    ) -> Result<Self, FieldError> {
        for season in airnet_core::season::Season::ALL {
            if baseline.get(season) < 0.0 {
                return Err(FieldError::Invalid(format!(
                    "baseline for {season} must be non-negative"
                )));
            }
        }
        for h in &diurnal {
            if h.amplitude < 0.0 {
                return Err(FieldError::Invalid("diurnal amplitude must be non-negative".into()));
            }
        }
        for e in &events {
            e.validate()?;
        }
        if !(pm25_ratio > 0.0 && pm25_ratio <= 1.0) {
            return Err(FieldError::Invalid(format!(
                "pm25_ratio must be in (0, 1], got {pm25_ratio}"
            )));
        }
        let (texture_pm10, texture_pm25) = match texture {
            Some(params) => {
                params.validate()?;
                let fine = TextureParams {
                    amplitude: params.amplitude * pm25_ratio,
                    seed: params.seed.wrapping_add(1),
                    ..params
                };
                (Some(Texture::new(&params)), Some(Texture::new(&fine)))
            }
            None => (None, None),
        };
        Ok(Self {
            bbox,
            baseline,
            calendar,
            diurnal,
            events,
            pm25_ratio,
            texture_pm10,
            texture_pm25,
        })
    }

    pub fn bbox(&self) -> &Bbox {
        &self.bbox
    }

    fn diurnal_at(&self, t: u64) -> f64 {
        let hour = (t % 86_400) as f64 / 3_600.0;
        self.diurnal
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let cycles = (i + 1) as f64;
                h.amplitude * (std::f64::consts::TAU * cycles * (hour - h.phase_hr) / 24.0).cos()
            })
            .sum()
    }

    /// Ground-truth (pm10, pm25) at a location and time, µg/m³.
    pub fn truth_at(&self, loc: &Point, t: u64) -> Result<(f64, f64), FieldError> {
        if !self.bbox.contains(loc) {
            return Err(FieldError::OutOfRegion {
                lat: loc.lat,
                lon: loc.lon,
            });
        }
        let season = self.calendar.season_for_month(month_of(t));
        let mut pm10 = self.baseline.get(season) + self.diurnal_at(t);
        for event in &self.events {
            pm10 += event.contribution(loc, t);
        }
        let (east, north) = self.bbox.local_meters(loc);
        if let Some(tex) = &self.texture_pm10 {
            pm10 += tex.eval(east, north, t as f64);
        }
        let pm10 = pm10.max(0.0);

        let mut pm25 = self.pm25_ratio * pm10;
        if let Some(tex) = &self.texture_pm25 {
            pm25 += tex.eval(east, north, t as f64);
        }
        let pm25 = pm25.clamp(0.0, pm10);
        Ok((pm10, pm25))
    }

    /// Upper bound on |d pm10 / dt| in µg/m³ per second, for continuity
    /// checks.
    pub fn time_slope_bound(&self) -> f64 {
        let diurnal: f64 = self
            .diurnal
            .iter()
            .enumerate()
            .map(|(i, h)| h.amplitude * std::f64::consts::TAU * (i + 1) as f64 / 86_400.0)
            .sum();
        let events: f64 = self.events.iter().map(PlumeEvent::slope_bound).sum();
        let texture = self
            .texture_pm10
            .as_ref()
            .map(Texture::time_slope_bound)
            .unwrap_or(0.0);
        diurnal + events + texture
    }
}
