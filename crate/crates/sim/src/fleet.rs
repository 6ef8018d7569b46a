//! Drives the device fleet against the truth field through simulated time.
//!
//! Devices advance in deployment order on a shared tick clock; each owns an
//! independent seeded RNG stream (weather noise, then PM10 and PM2.5 sensor
//! noise, per tick), so runs are reproducible and devices never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use airnet_core::seed::subseed;
use airnet_proto::{encode_frame, SensorReading};

use crate::device::DeviceState;
use crate::month_of;
use crate::scenario::Runtime;

/// Receives what the fleet emits during a run.
pub trait FleetObserver {
    /// An encoded frame left a device radio.
    fn frame(&mut self, bytes: &[u8]);

    /// Ground truth at a device site for this tick, before sensor error.
    fn truth(&mut self, device_id: u16, lat: f64, lon: f64, t: u64, pm10: f64, pm25: f64) {
        let _ = (device_id, lat, lon, t, pm10, pm25);
    }
}

impl<F: FnMut(&[u8])> FleetObserver for F {
    fn frame(&mut self, bytes: &[u8]) {
        self(bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviceSummary {
    pub device_id: u16,
    pub sensed: u64,
    pub dropped: u64,
    /// Readings still cached when the run ended (outage past the end).
    pub buffered_at_end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FleetSummary {
    pub devices: Vec<DeviceSummary>,
}

impl FleetSummary {
    pub fn total_sensed(&self) -> u64 {
        self.devices.iter().map(|d| d.sensed).sum()
    }

    pub fn total_dropped(&self) -> u64 {
        self.devices.iter().map(|d| d.dropped).sum()
    }

    pub fn total_buffered_at_end(&self) -> u64 {
        self.devices.iter().map(|d| d.buffered_at_end).sum()
    }
}

/// Runs the scenario clock from start to end, feeding every emitted frame
/// (and per-tick ground truth) to `observer`.
pub fn run_fleet<O: FleetObserver>(runtime: &Runtime, observer: &mut O) -> FleetSummary {
    let sites = &runtime.deployment.sites;
    let mut devices: Vec<DeviceState> = sites
        .iter()
        .map(|s| {
            let mut d = DeviceState::new(s.device_id);
            d.sample_period_s = runtime.sample_period_s;
            d
        })
        .collect();
    let mut rngs: Vec<ChaCha12Rng> = sites
        .iter()
        .map(|s| ChaCha12Rng::seed_from_u64(subseed(runtime.seed, "device", s.device_id as u64)))
        .collect();

    for t in runtime.tick_times() {
        let season = runtime.calendar.season_for_month(month_of(t));
        for (i, site) in sites.iter().enumerate() {
            let rng = &mut rngs[i];
            let (temp, rh) = runtime.weather.sample(t, season, rng);
            let (pm10_truth, pm25_truth) = runtime
                .field
                .truth_at(&site.point, t)
                .expect("deployment sites lie inside the field region");
            observer.truth(
                site.device_id,
                site.point.lat,
                site.point.lon,
                t,
                pm10_truth,
                pm25_truth,
            );
            let model = &runtime.sensors[&site.device_id];
            let raw_pm10 = model.sample(pm10_truth, rh, rng);
            let raw_pm25 = model.sample(pm25_truth, rh, rng);
            let reading = SensorReading::new(
                t,
                raw_pm10 as f32,
                raw_pm25 as f32,
                temp as f32,
                rh as f32,
            );
            let online = !runtime.outages[&site.device_id].offline_at(t);
            for frame in devices[i].tick(t, reading, online) {
                let bytes = encode_frame(&frame).expect("device frames are within limits");
                observer.frame(&bytes);
            }
        }
    }

    FleetSummary {
        devices: devices
            .iter()
            .map(|d| DeviceSummary {
                device_id: d.device_id,
                sensed: d.sensed,
                dropped: d.drops,
                buffered_at_end: d.buffered() as u64,
            })
            .collect(),
    }
}
