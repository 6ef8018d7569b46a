//! Closed-loop fleet simulator.
//!
//! Builds a synthetic ground-truth PM field over a deployment region, drives
//! a fleet of imperfect, outage-prone devices against it, and emits the
//! frames they would transmit. Because the truth is known analytically,
//! every downstream stage (ingest, cleaning, calibration, interpolation,
//! correlation) can be verified against it.

pub mod deploy;
pub mod device;
pub mod field;
pub mod fleet;
pub mod scenario;
pub mod sensor;
pub mod truth_csv;
pub mod weather;

pub use deploy::{generate_deployment, DeploymentMap, DeviceSite, Layout, LocationType};
pub use device::{DeviceState, OutageSchedule, BUFFER_CAPACITY, SAMPLE_PERIOD_S};
pub use field::{PlumeEvent, TruthField};
pub use fleet::{run_fleet, FleetObserver, FleetSummary};
pub use scenario::{Runtime, Scenario, ScenarioError};
pub use sensor::SensorErrorModel;
pub use weather::WeatherModel;

/// Parses an epoch timestamp to UTC calendar month (1..=12).
pub fn month_of(timestamp: u64) -> u32 {
    use chrono::Datelike;
    chrono::DateTime::from_timestamp(timestamp as i64, 0)
        .expect("timestamp in range")
        .month()
}
