//! One sensing instance and its 24-byte payload codec.

use serde::{Deserialize, Serialize};

use crate::WireError;

/// Serialized size of one sensing instance.
pub const PAYLOAD_SIZE: usize = 24;

/// One sensing instance. Concentrations are µg/m³ clamped to the sensor
/// range [0, 999.9], temperature °C, relative humidity %.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    /// Seconds since the Unix epoch, from the device RTC.
    pub created_at: u64,
    pub pm10: f32,
    pub pm25: f32,
    pub temp: f32,
    pub rh: f32,
}

impl SensorReading {
    pub fn new(created_at: u64, pm10: f32, pm25: f32, temp: f32, rh: f32) -> Self {
        Self {
            created_at,
            pm10,
            pm25,
            temp,
            rh,
        }
    }
}

/// Encodes a reading into its fixed little-endian layout.
pub fn encode_payload(reading: &SensorReading) -> [u8; PAYLOAD_SIZE] {
    let mut out = [0u8; PAYLOAD_SIZE];
    out[0..8].copy_from_slice(&reading.created_at.to_le_bytes());
    out[8..12].copy_from_slice(&reading.pm10.to_le_bytes());
    out[12..16].copy_from_slice(&reading.pm25.to_le_bytes());
    out[16..20].copy_from_slice(&reading.temp.to_le_bytes());
    out[20..24].copy_from_slice(&reading.rh.to_le_bytes());
    out
}

/// Decodes a 24-byte payload.
pub fn decode_payload(bytes: &[u8]) -> Result<SensorReading, WireError> {
    if bytes.len() != PAYLOAD_SIZE {
        return Err(WireError::Truncated(bytes.len()));
    }
    let arr = |r: core::ops::Range<usize>| -> [u8; 4] { bytes[r].try_into().unwrap() };
    Ok(SensorReading {
        created_at: u64::from_le_bytes(bytes[0..8].try_into().unwrap()),
        pm10: f32::from_le_bytes(arr(8..12)),
        pm25: f32::from_le_bytes(arr(12..16)),
        temp: f32::from_le_bytes(arr(16..20)),
        rh: f32::from_le_bytes(arr(20..24)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn payload_is_exactly_24_bytes() {
        let r = SensorReading::new(1_700_000_000, 81.4, 44.1, 29.5, 63.0);
        assert_eq!(encode_payload(&r).len(), 24);
    }

    #[test]
    fn hand_assembled_layout() {
        // created_at = 1, everything else zero: one low byte set, 23 zeros.
        let r = SensorReading::new(1, 0.0, 0.0, 0.0, 0.0);
        let bytes = encode_payload(&r);
        assert_eq!(bytes[0], 0x01);
        assert!(bytes[1..].iter().all(|&b| b == 0));
    }

    #[test]
    fn truncated_payload_rejected() {
        assert_eq!(decode_payload(&[0u8; 23]), Err(WireError::Truncated(23)));
    }

    proptest! {
        #[test]
        fn round_trip(
            created_at in 0u64..=u64::MAX / 2,
            pm10 in 0.0f32..=999.9,
            pm25 in 0.0f32..=999.9,
            temp in -40.0f32..=85.0,
            rh in 0.0f32..=100.0,
        ) {
            let r = SensorReading::new(created_at, pm10, pm25, temp, rh);
            prop_assert_eq!(decode_payload(&encode_payload(&r)).unwrap(), r);
        }
    }
}
