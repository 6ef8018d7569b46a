//! CRC-protected frames carrying one or more payloads.

use crate::reading::{decode_payload, encode_payload, SensorReading, PAYLOAD_SIZE};
use crate::WireError;

pub const FRAME_MAGIC: [u8; 2] = [0xA1, 0x51];
pub const PROTOCOL_VERSION: u8 = 0x01;
/// Header (magic 2 + version 1 + device_id 2 + count 2) and trailing CRC.
pub const FRAME_OVERHEAD: usize = 7 + 4;
/// Bulk offload chunk size; keeps the gateway parser allocation bounded.
pub const MAX_READINGS_PER_FRAME: usize = 2000;

const HEADER_SIZE: usize = 7;

/// A decoded frame: the sending device and its readings in transmit order.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub device_id: u16,
    pub readings: Vec<SensorReading>,
}

impl Frame {
    pub fn new(device_id: u16, readings: Vec<SensorReading>) -> Self {
        Self {
            device_id,
            readings,
        }
    }
}

/// Serializes a frame. The reading count must be in `1..=2000`; callers
/// split larger batches into multiple frames.
pub fn encode_frame(frame: &Frame) -> Result<Vec<u8>, WireError> {
    let count = frame.readings.len();
    if count == 0 || count > MAX_READINGS_PER_FRAME {
        return Err(WireError::BadReadingCount {
            got: count,
            max: MAX_READINGS_PER_FRAME,
        });
    }
    let mut out = Vec::with_capacity(HEADER_SIZE + count * PAYLOAD_SIZE + 4);
    out.extend_from_slice(&FRAME_MAGIC);
    out.push(PROTOCOL_VERSION);
    out.extend_from_slice(&frame.device_id.to_le_bytes());
    out.extend_from_slice(&(count as u16).to_le_bytes());
    for reading in &frame.readings {
        out.extend_from_slice(&encode_payload(reading));
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

/// Parses and verifies a frame: magic, version, declared length and CRC.
pub fn decode_frame(bytes: &[u8]) -> Result<Frame, WireError> {
    if bytes.len() < FRAME_OVERHEAD + PAYLOAD_SIZE {
        return Err(WireError::Truncated(bytes.len()));
    }
    if bytes[0..2] != FRAME_MAGIC {
        return Err(WireError::BadMagic(bytes[0], bytes[1]));
    }
    if bytes[2] != PROTOCOL_VERSION {
        return Err(WireError::BadVersion(bytes[2]));
    }
    let device_id = u16::from_le_bytes(bytes[3..5].try_into().unwrap());
    let count = u16::from_le_bytes(bytes[5..7].try_into().unwrap()) as usize;
    if count == 0 || count > MAX_READINGS_PER_FRAME {
        return Err(WireError::BadReadingCount {
            got: count,
            max: MAX_READINGS_PER_FRAME,
        });
    }
    let expected = HEADER_SIZE + count * PAYLOAD_SIZE + 4;
    if bytes.len() != expected {
        return Err(WireError::LengthMismatch {
            declared: count,
            actual: bytes.len().saturating_sub(FRAME_OVERHEAD),
        });
    }
    let body_end = bytes.len() - 4;
    let stored = u32::from_le_bytes(bytes[body_end..].try_into().unwrap());
    let computed = crc32fast::hash(&bytes[..body_end]);
    if stored != computed {
        return Err(WireError::CrcMismatch { stored, computed });
    }
    let mut readings = Vec::with_capacity(count);
    for i in 0..count {
        let start = HEADER_SIZE + i * PAYLOAD_SIZE;
        readings.push(decode_payload(&bytes[start..start + PAYLOAD_SIZE])?);
    }
    Ok(Frame {
        device_id,
        readings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample_reading(t: u64) -> SensorReading {
        SensorReading::new(t, 81.5, 44.25, 29.0, 63.5)
    }

    #[test]
    fn single_reading_frame_is_35_bytes() {
        let frame = Frame::new(7, vec![sample_reading(1_700_000_000)]);
        let bytes = encode_frame(&frame).unwrap();
        assert_eq!(bytes.len(), 7 + 24 + 4);
        assert_eq!(decode_frame(&bytes).unwrap(), frame);
    }

    #[test]
    fn empty_frame_is_rejected() {
        assert_eq!(
            encode_frame(&Frame::new(1, vec![])),
            Err(WireError::BadReadingCount { got: 0, max: 2000 })
        );
    }

    #[test]
    fn oversized_frame_is_rejected() {
        let readings = vec![sample_reading(0); 2001];
        assert!(matches!(
            encode_frame(&Frame::new(1, readings)),
            Err(WireError::BadReadingCount { got: 2001, .. })
        ));
    }

    #[test]
    fn bad_magic_and_version() {
        let mut bytes = encode_frame(&Frame::new(1, vec![sample_reading(5)])).unwrap();
        bytes[0] = 0x00;
        assert!(matches!(decode_frame(&bytes), Err(WireError::BadMagic(..))));

        let mut bytes = encode_frame(&Frame::new(1, vec![sample_reading(5)])).unwrap();
        bytes[2] = 0x02;
        // Version byte is CRC-protected too, so either error is a rejection;
        // version is checked first.
        assert_eq!(decode_frame(&bytes), Err(WireError::BadVersion(0x02)));
    }

    proptest! {
        #[test]
        fn round_trip_multi_reading(
            device_id in 0u16..,
            times in proptest::collection::vec(0u64..1u64 << 40, 1..50),
        ) {
            let readings: Vec<SensorReading> =
                times.iter().map(|&t| sample_reading(t)).collect();
            let frame = Frame::new(device_id, readings);
            let bytes = encode_frame(&frame).unwrap();
            prop_assert_eq!(decode_frame(&bytes).unwrap(), frame);
        }

        #[test]
        fn any_corrupted_byte_is_detected(
            times in proptest::collection::vec(0u64..1u64 << 40, 1..20),
            pos_seed in 0usize..10_000,
            flip in 1u8..=255,
        ) {
            let readings: Vec<SensorReading> =
                times.iter().map(|&t| sample_reading(t)).collect();
            let frame = Frame::new(42, readings);
            let mut bytes = encode_frame(&frame).unwrap();
            let pos = pos_seed % bytes.len();
            bytes[pos] ^= flip;
            prop_assert!(decode_frame(&bytes) != Ok(frame));
        }
    }
}
