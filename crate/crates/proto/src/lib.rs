//! Telemetry wire protocol.
//!
//! A sensing instance serializes to a fixed 24-byte payload; payloads travel
//! in CRC-protected frames, and frames cross a reliable byte stream behind a
//! little-endian `u32` length prefix. The full layout, including golden
//! fixtures, is documented in `docs/wire.md` at the repository root.
//!
//! ```text
//! payload (24 B):  created_at u64 LE | pm10 f32 | pm25 f32 | temp f32 | rh f32
//! frame:           A1 51 | version 01 | device_id u16 LE | count u16 LE
//!                  | count * 24 B payloads | crc32 u32 LE (header + payloads)
//! ```

mod frame;
mod reading;
mod stream;

pub use frame::{
    decode_frame, encode_frame, Frame, FRAME_MAGIC, FRAME_OVERHEAD, MAX_READINGS_PER_FRAME,
    PROTOCOL_VERSION,
};
pub use reading::{decode_payload, encode_payload, SensorReading, PAYLOAD_SIZE};
pub use stream::{read_frame, send_frame, write_frame, Ack, AckStatus, MAX_FRAME_SIZE};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WireError {
    #[error("frame too short: {0} bytes")]
    Truncated(usize),
    #[error("bad magic bytes {0:#04x} {1:#04x}")]
    BadMagic(u8, u8),
    #[error("unsupported protocol version {0}")]
    BadVersion(u8),
    #[error("frame must carry between 1 and {max} readings, got {got}")]
    BadReadingCount { got: usize, max: usize },
    #[error("declared {declared} readings but frame holds {actual} bytes of payload")]
    LengthMismatch { declared: usize, actual: usize },
    #[error("crc mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("frame length {0} exceeds the {1}-byte protocol limit")]
    Oversized(usize, usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for WireError {
    fn from(e: std::io::Error) -> Self {
        WireError::Io(e.to_string())
    }
}
