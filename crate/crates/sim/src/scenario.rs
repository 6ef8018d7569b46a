//! Scenario files: one TOML document fully determines a run.
//!
//! Timestamps are quoted RFC 3339 strings (`"2021-08-01T00:00:00Z"`). The
//! master seed in `[run]` derives every stream in the simulation, so a
//! scenario plus a seed reproduces the artifact tree byte for byte.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, Utc};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use airnet_core::geo::BoundingBox;
use airnet_core::season::{PerSeason, SeasonCalendar};
use airnet_core::seed::subseed;
use airnet_core::{Bbox, Point};

use crate::deploy::{generate_deployment, DeploymentMap, Layout};
use crate::device::OutageSchedule;
use crate::field::{Harmonic, PlumeEvent, TextureParams, TruthField};
use crate::sensor::SensorErrorModel;
use crate::weather::WeatherModel;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    /// Carries the TOML parser's line/column diagnostics.
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: &str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub run: RunConfig,
    pub field: FieldConfig,
    pub deployment: DeploymentConfig,
    #[serde(default)]
    pub sensors: SensorsConfig,
    #[serde(default)]
    pub weather: WeatherModel,
    #[serde(default)]
    pub outages: OutagesConfig,
    #[serde(default)]
    pub calendar: CalendarConfig,
    #[serde(default)]
    pub analytics: AnalyticsConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub start: DateTime<Utc>,
    pub duration_s: u64,
    #[serde(default = "default_period")]
    pub sample_period_s: u64,
    pub seed: u64,
}

fn default_period() -> u64 {
    crate::device::SAMPLE_PERIOD_S
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldConfig {
    pub bbox: BboxConfig,
    pub baseline: PerSeason<f64>,
    #[serde(default = "default_pm25_ratio")]
    pub pm25_ratio: f64,
    #[serde(default)]
    pub diurnal: Vec<Harmonic>,
    #[serde(default)]
    pub events: Vec<EventConfig>,
    #[serde(default)]
    pub texture: Option<TextureConfig>,
}

fn default_pm25_ratio() -> f64 {
    0.55
}

/// Region as explicit corners or as a square around a center point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BboxConfig {
    Corners { min: Point, max: Point },
    Square { center: Point, side_m: f64 },
}

impl BboxConfig {
    fn build(&self) -> Result<Bbox, ScenarioError> {
        match self {
            BboxConfig::Corners { min, max } => BoundingBox::new(*min, *max)
                .map_err(|e| invalid("field.bbox", e.to_string())),
            BboxConfig::Square { center, side_m } => BoundingBox::square(*center, *side_m)
                .map_err(|e| invalid("field.bbox", e.to_string())),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventConfig {
    pub center: Point,
    pub sigma_m: f64,
    pub peak: f64,
    pub start: DateTime<Utc>,
    pub peak_time: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextureConfig {
    pub length_scale_m: f64,
    pub amplitude: f64,
    #[serde(default = "default_time_scale")]
    pub time_scale_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_features")]
    pub features: usize,
}

fn default_time_scale() -> f64 {
    14_400.0
}

fn default_features() -> usize {
    32
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeploymentConfig {
    pub count: usize,
    #[serde(flatten)]
    pub layout: Layout,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SensorsConfig {
    /// Model for every device unless overridden below.
    #[serde(default)]
    pub default: SensorErrorModel,
    /// Per-device uniform draws; any field left out keeps the default value.
    #[serde(default)]
    pub spread: Option<SensorSpread>,
    /// Full-model replacements keyed by device id.
    #[serde(default)]
    pub overrides: BTreeMap<String, SensorErrorModel>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SensorSpread {
    pub alpha: Option<[f64; 2]>,
    pub beta: Option<[f64; 2]>,
    pub noise_sigma: Option<[f64; 2]>,
    pub rh_inflation: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutagesConfig {
    #[serde(default)]
    pub fixed: Vec<FixedOutage>,
    #[serde(default)]
    pub random: Option<RandomOutages>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedOutage {
    pub device_id: u16,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

/// Exponentially distributed up/down times per device. Down times are capped
/// and truncated so that every backlog flushes before the run ends.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RandomOutages {
    pub mean_up_hours: f64,
    pub mean_down_minutes: f64,
    pub max_down_minutes: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalendarConfig {
    pub monsoon: Vec<u32>,
    pub winter: Vec<u32>,
    pub summer: Vec<u32>,
}

impl Default for CalendarConfig {
    fn default() -> Self {
        Self {
            monsoon: vec![6, 7, 8, 9, 10],
            winter: vec![11, 12, 1, 2],
            summer: vec![3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalyticsConfig {
    #[serde(default = "default_power")]
    pub idw_power: f64,
    #[serde(default = "default_grid_n")]
    pub grid_nx: usize,
    #[serde(default = "default_grid_n")]
    pub grid_ny: usize,
    #[serde(default = "default_knee_threshold")]
    pub knee_threshold: f64,
    #[serde(default = "default_min_overlap")]
    pub min_overlap_hours: usize,
    /// Bin correlation points by distance before fitting, when set.
    #[serde(default)]
    pub bin_width_m: Option<f64>,
}

fn default_power() -> f64 {
    2.0
}

fn default_grid_n() -> usize {
    40
}

fn default_knee_threshold() -> f64 {
    0.1
}

fn default_min_overlap() -> usize {
    24
}

impl Default for AnalyticsConfig {
    fn default() -> Self {
        Self {
            idw_power: default_power(),
            grid_nx: default_grid_n(),
            grid_ny: default_grid_n(),
            knee_threshold: default_knee_threshold(),
            min_overlap_hours: default_min_overlap(),
            bin_width_m: None,
        }
    }
}

/// A validated scenario with every runtime object constructed.
#[derive(Debug, Clone)]
pub struct Runtime {
    pub seed: u64,
    pub start: u64,
    pub duration_s: u64,
    pub sample_period_s: u64,
    pub field: TruthField,
    pub deployment: DeploymentMap,
    pub sensors: BTreeMap<u16, SensorErrorModel>,
    pub weather: WeatherModel,
    pub outages: BTreeMap<u16, OutageSchedule>,
    pub calendar: SeasonCalendar,
    pub analytics: AnalyticsConfig,
}

impl Runtime {
    /// Sample instants of the run: `[start, start + duration)` on the
    /// sample-period grid.
    pub fn tick_times(&self) -> impl Iterator<Item = u64> + '_ {
        let end = self.start + self.duration_s;
        (0..)
            .map(move |i| self.start + i * self.sample_period_s)
            .take_while(move |&t| t < end)
    }

    pub fn tick_count(&self) -> u64 {
        self.duration_s.div_ceil(self.sample_period_s)
    }

    pub fn end(&self) -> u64 {
        self.start + self.duration_s
    }
}

fn to_epoch(ts: &DateTime<Utc>, path: &str) -> Result<u64, ScenarioError> {
    let secs = ts.timestamp();
    if secs < 0 {
        return Err(invalid(path, "timestamps before 1970 are not supported"));
    }
    Ok(secs as u64)
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }

    /// Validates the configuration and builds all runtime objects.
    /// `seed_override` replaces `[run] seed` when given.
    pub fn build(&self, seed_override: Option<u64>) -> Result<Runtime, ScenarioError> {
        let seed = seed_override.unwrap_or(self.run.seed);
        let period = self.run.sample_period_s;
        if period == 0 {
            return Err(invalid("run.sample_period_s", "must be positive"));
        }
        if self.run.duration_s == 0 {
            return Err(invalid("run.duration_s", "must be positive"));
        }
        let start = to_epoch(&self.run.start, "run.start")?;
        if start % period != 0 {
            return Err(invalid(
                "run.start",
                format!("must be aligned to the {period}-second sample grid"),
            ));
        }

        let bbox = self.field.bbox.build()?;
        let calendar = SeasonCalendar::new(
            &self.calendar.monsoon,
            &self.calendar.winter,
            &self.calendar.summer,
        )
        .map_err(|e| invalid("calendar", e.to_string()))?;

        let mut events = Vec::with_capacity(self.field.events.len());
        for (i, e) in self.field.events.iter().enumerate() {
            let path = format!("field.events[{i}]");
            events.push(PlumeEvent {
                center: e.center,
                sigma_m: e.sigma_m,
                peak: e.peak,
                start: to_epoch(&e.start, &path)?,
                peak_time: to_epoch(&e.peak_time, &path)?,
                end: to_epoch(&e.end, &path)?,
            });
        }
        let texture = self.field.texture.as_ref().map(|t| TextureParams {
            length_scale_m: t.length_scale_m,
            amplitude: t.amplitude,
            time_scale_s: t.time_scale_s,
            seed: t.seed,
            features: t.features,
        });
        let field = TruthField::new(
            bbox,
            self.field.baseline,
            calendar,
            self.field.diurnal.clone(),
            events,
            self.field.pm25_ratio,
            texture,
        )
        .map_err(|e| invalid("field", e.to_string()))?;

        let deployment = generate_deployment(&bbox, self.deployment.count, &self.deployment.layout)
            .map_err(|e| invalid("deployment", e.to_string()))?;

        let sensors = self.build_sensors(seed, &deployment)?;
        let outages = self.build_outages(seed, &deployment, start, period)?;

        Ok(Runtime {
            seed,
            start,
            duration_s: self.run.duration_s,
            sample_period_s: period,
            field,
            deployment,
            sensors,
            weather: self.weather,
            outages,
            calendar,
            analytics: self.analytics.clone(),
        })
    }

    fn build_sensors(
        &self,
        seed: u64,
        deployment: &DeploymentMap,
    ) -> Result<BTreeMap<u16, SensorErrorModel>, ScenarioError> {
        self.sensors
            .default
            .validate()
            .map_err(|m| invalid("sensors.default", m))?;

        let mut overrides: BTreeMap<u16, SensorErrorModel> = BTreeMap::new();
        for (key, model) in &self.sensors.overrides {
            let id: u16 = key.parse().map_err(|_| {
                invalid("sensors.overrides", format!("key {key:?} is not a device id"))
            })?;
            if deployment.site(id).is_none() {
                return Err(invalid(
                    "sensors.overrides",
                    format!("device {id} is not part of the deployment"),
                ));
            }
            model
                .validate()
                .map_err(|m| invalid(&format!("sensors.overrides.{id}"), m))?;
            overrides.insert(id, *model);
        }

        let mut sensors = BTreeMap::new();
        for site in &deployment.sites {
            let id = site.device_id;
            let model = if let Some(model) = overrides.get(&id) {
                *model
            } else if let Some(spread) = &self.sensors.spread {
                let mut rng = ChaCha12Rng::seed_from_u64(subseed(seed, "sensor", id as u64));
                let draw = |rng: &mut ChaCha12Rng, range: &Option<[f64; 2]>, fallback: f64| {
                    match range {
                        Some([lo, hi]) if lo < hi => rng.random_range(*lo..*hi),
                        Some([lo, _]) => *lo,
                        None => fallback,
                    }
                };
                let d = self.sensors.default;
                SensorErrorModel {
                    alpha: draw(&mut rng, &spread.alpha, d.alpha),
                    beta: draw(&mut rng, &spread.beta, d.beta),
                    noise_sigma: draw(&mut rng, &spread.noise_sigma, d.noise_sigma),
                    rh_inflation: draw(&mut rng, &spread.rh_inflation, d.rh_inflation),
                }
            } else {
                self.sensors.default
            };
            model
                .validate()
                .map_err(|m| invalid(&format!("sensors (device {id})"), m))?;
            sensors.insert(id, model);
        }
        Ok(sensors)
    }

    fn build_outages(
        &self,
        seed: u64,
        deployment: &DeploymentMap,
        start: u64,
        period: u64,
    ) -> Result<BTreeMap<u16, OutageSchedule>, ScenarioError> {
        let end = start + self.run.duration_s;
        // Random outages end at least two ticks early so the final backlog
        // always flushes inside the run.
        let hard_end = end.saturating_sub(2 * period);

        let mut fixed: BTreeMap<u16, Vec<(u64, u64)>> = BTreeMap::new();
        for (i, o) in self.outages.fixed.iter().enumerate() {
            let path = format!("outages.fixed[{i}]");
            if deployment.site(o.device_id).is_none() {
                return Err(invalid(
                    &path,
                    format!("device {} is not part of the deployment", o.device_id),
                ));
            }
            let s = to_epoch(&o.start, &path)?;
            let e = to_epoch(&o.end, &path)?;
            if s >= e {
                return Err(invalid(&path, "outage start must precede end"));
            }
            fixed.entry(o.device_id).or_default().push((s, e));
        }

        let mut outages = BTreeMap::new();
        for site in &deployment.sites {
            let id = site.device_id;
            let mut intervals = fixed.remove(&id).unwrap_or_default();
            if let Some(random) = &self.outages.random {
                if !(random.mean_up_hours > 0.0
                    && random.mean_down_minutes > 0.0
                    && random.max_down_minutes > 0.0)
                {
                    return Err(invalid("outages.random", "all durations must be positive"));
                }
                let mut rng = ChaCha12Rng::seed_from_u64(subseed(seed, "outage", id as u64));
                let up = Exp::new(1.0 / (random.mean_up_hours * 3_600.0)).unwrap();
                let down = Exp::new(1.0 / (random.mean_down_minutes * 60.0)).unwrap();
                let cap = (random.max_down_minutes * 60.0).max(1.0);
                let mut t = start as f64 + up.sample(&mut rng);
                while (t as u64) < hard_end {
                    let d = down.sample(&mut rng).min(cap).max(1.0);
                    let s = t as u64;
                    let e = ((t + d) as u64).min(hard_end);
                    if s < e {
                        intervals.push((s, e));
                    }
                    t += d + up.sample(&mut rng);
                }
            }
            let schedule = OutageSchedule::new(intervals).map_err(|e| {
                invalid(
                    &format!("outages (device {id})"),
                    format!("{e}; fixed outages must not overlap random ones"),
                )
            })?;
            outages.insert(id, schedule);
        }
        Ok(outages)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [run]
        start = "2021-08-01T00:00:00Z"
        duration_s = 3600
        seed = 42

        [field]
        baseline = { monsoon = 40.0, winter = 110.0, summer = 70.0 }

        [field.bbox]
        center = { lat = 17.445, lon = 78.35 }
        side_m = 2000.0

        [deployment]
        layout = "grid"
        count = 4
    "#;

    #[test]
    fn minimal_scenario_parses_and_builds() {
        let scenario = Scenario::from_toml_str(MINIMAL).unwrap();
        let runtime = scenario.build(None).unwrap();
        assert_eq!(runtime.seed, 42);
        assert_eq!(runtime.sample_period_s, 30);
        assert_eq!(runtime.tick_count(), 120);
        assert_eq!(runtime.deployment.sites.len(), 4);
        assert_eq!(runtime.sensors.len(), 4);
        assert!(runtime.outages.values().all(|o| o.intervals().is_empty()));
    }

    #[test]
    fn seed_override_wins() {
        let scenario = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(scenario.build(Some(7)).unwrap().seed, 7);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = MINIMAL.replace("duration_s = 3600", "duration_s = \"x\"");
        let err = Scenario::from_toml_str(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "diagnostic was: {msg}");
    }

    #[test]
    fn misaligned_start_is_rejected() {
        let bad = MINIMAL.replace("00:00:00Z", "00:00:10Z");
        let scenario = Scenario::from_toml_str(&bad).unwrap();
        let err = scenario.build(None).unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid { .. }));
    }

    #[test]
    fn sensor_spread_is_per_device_deterministic() {
        let text = format!(
            "{MINIMAL}\n[sensors.spread]\nalpha = [0.6, 1.6]\nbeta = [-10.0, 20.0]\n"
        );
        let scenario = Scenario::from_toml_str(&text).unwrap();
        let a = scenario.build(None).unwrap();
        let b = scenario.build(None).unwrap();
        assert_eq!(a.sensors, b.sensors);
        let alphas: Vec<f64> = a.sensors.values().map(|m| m.alpha).collect();
        assert!(alphas.iter().any(|v| (v - alphas[0]).abs() > 1e-9));
        assert!(alphas.iter().all(|&v| (0.6..1.6).contains(&v)));
    }

    #[test]
    fn random_outages_end_before_the_run_does() {
        let text = format!(
            "{MINIMAL}\n[outages.random]\nmean_up_hours = 0.2\nmean_down_minutes = 5.0\nmax_down_minutes = 10.0\n"
        );
        let scenario = Scenario::from_toml_str(&text).unwrap();
        let runtime = scenario.build(None).unwrap();
        let hard_end = runtime.end() - 2 * runtime.sample_period_s;
        let mut any = false;
        for schedule in runtime.outages.values() {
            for &(s, e) in schedule.intervals() {
                any = true;
                assert!(s < e && e <= hard_end);
            }
        }
        assert!(any, "expected the aggressive schedule to create outages");
    }

    #[test]
    fn override_for_unknown_device_is_rejected() {
        let text = format!("{MINIMAL}\n[sensors.overrides.99]\nalpha = 0.8\n");
        let scenario = Scenario::from_toml_str(&text).unwrap();
        assert!(matches!(
            scenario.build(None),
            Err(ScenarioError::Invalid { .. })
        ));
    }

    #[test]
    fn paper49_alias_is_accepted() {
        let text = MINIMAL
            .replace("layout = \"grid\"", "layout = \"paper49\"")
            .replace("count = 4", "count = 49");
        let scenario = Scenario::from_toml_str(&text).unwrap();
        let runtime = scenario.build(None).unwrap();
        assert_eq!(runtime.deployment.sites.len(), 49);
    }

    #[test]
    fn round_trips_through_toml() {
        let scenario = Scenario::from_toml_str(MINIMAL).unwrap();
        let text = scenario.to_toml();
        let again = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(again.run.seed, scenario.run.seed);
        assert_eq!(again.deployment.count, scenario.deployment.count);
    }
}
