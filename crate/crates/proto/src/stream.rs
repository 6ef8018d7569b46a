//! Length-prefixed framing over a reliable byte stream, plus the ingest ack.

use std::io::{Read, Write};

use crate::frame::{FRAME_OVERHEAD, MAX_READINGS_PER_FRAME};
use crate::reading::PAYLOAD_SIZE;
use crate::WireError;

/// Largest legal frame: full header plus 2000 payloads.
pub const MAX_FRAME_SIZE: usize = FRAME_OVERHEAD + MAX_READINGS_PER_FRAME * PAYLOAD_SIZE;

/// Gateway response to one frame: `status u8 | accepted u16 LE | reserved u8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ack {
    pub status: AckStatus,
    pub accepted: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AckStatus {
    Ok,
    Rejected,
}

impl Ack {
    pub fn ok(accepted: u16) -> Self {
        Self {
            status: AckStatus::Ok,
            accepted,
        }
    }

    pub fn rejected() -> Self {
        Self {
            status: AckStatus::Rejected,
            accepted: 0,
        }
    }

    pub fn encode(&self) -> [u8; 4] {
        let status = match self.status {
            AckStatus::Ok => 0u8,
            AckStatus::Rejected => 1u8,
        };
        let acc = self.accepted.to_le_bytes();
        [status, acc[0], acc[1], 0]
    }

    pub fn decode(bytes: &[u8; 4]) -> Result<Self, WireError> {
        let status = match bytes[0] {
            0 => AckStatus::Ok,
            1 => AckStatus::Rejected,
            other => return Err(WireError::BadVersion(other)),
        };
        Ok(Self {
            status,
            accepted: u16::from_le_bytes([bytes[1], bytes[2]]),
        })
    }
}

/// Writes `u32 LE length | frame bytes`.
pub fn write_frame<W: Write>(w: &mut W, frame_bytes: &[u8]) -> Result<(), WireError> {
    if frame_bytes.len() > MAX_FRAME_SIZE {
        return Err(WireError::Oversized(frame_bytes.len(), MAX_FRAME_SIZE));
    }
    w.write_all(&(frame_bytes.len() as u32).to_le_bytes())?;
    w.write_all(frame_bytes)?;
    Ok(())
}

/// Writes one frame and waits for the gateway's 4-byte ack.
pub fn send_frame<S: Read + Write>(stream: &mut S, frame_bytes: &[u8]) -> Result<Ack, WireError> {
    write_frame(stream, frame_bytes)?;
    stream.flush()?;
    let mut buf = [0u8; 4];
    stream.read_exact(&mut buf)?;
    Ack::decode(&buf)
}

/// Reads one length-prefixed frame. `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<Vec<u8>>, WireError> {
    let mut len_bytes = [0u8; 4];
    match r.read_exact(&mut len_bytes) {
        Ok(()) => {}
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_le_bytes(len_bytes) as usize;
    if len == 0 || len > MAX_FRAME_SIZE {
        return Err(WireError::Oversized(len, MAX_FRAME_SIZE));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    Ok(Some(buf))
}
