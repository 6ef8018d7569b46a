//! Per-device channels, ingest counters and persistence.
//!
//! Disk layout under the data directory, when one is configured:
//!
//! ```text
//! dev-00007.log   appended 24-byte payload records, ingest order
//! dev-00007.snap  time-ordered deduplicated records, written by snapshot()
//! ```
//!
//! `open()` replays snapshot then log, so a gateway restart loses nothing
//! that was appended before the crash.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use airnet_proto::{decode_frame, decode_payload, encode_payload, SensorReading, PAYLOAD_SIZE};
use serde::Serialize;

use crate::GatewayError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelMeta {
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub location_type: Option<String>,
}

#[derive(Debug, Default)]
struct Channel {
    /// Readings in arrival order; ordering and dedup happen at query time.
    readings: Vec<SensorReading>,
    meta: ChannelMeta,
}

impl Channel {
    /// Time-ordered view with duplicate timestamps collapsed to the first
    /// arrival.
    fn ordered(&self) -> Vec<SensorReading> {
        let mut out = self.readings.clone();
        out.sort_by_key(|r| r.created_at);
        out.dedup_by_key(|r| r.created_at);
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct IngestCounters {
    pub frames_accepted: u64,
    pub frames_rejected: u64,
    pub readings_accepted: u64,
}

/// Summary row for the device listing.
#[derive(Debug, Clone, Serialize)]
pub struct DeviceInfo {
    pub device_id: u16,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
    pub location_type: Option<String>,
    /// Deduplicated reading count.
    pub readings: u64,
    pub first: Option<String>,
    pub last: Option<String>,
}

struct Inner {
    channels: BTreeMap<u16, Channel>,
    counters: IngestCounters,
    logs: BTreeMap<u16, BufWriter<File>>,
}

/// The gateway store. Appends are serialized per store; queries take a read
/// lock and see a consistent snapshot no older than the last completed
/// append.
pub struct Gateway {
    inner: RwLock<Inner>,
    data_dir: Option<PathBuf>,
}

fn log_path(dir: &Path, device_id: u16) -> PathBuf {
    dir.join(format!("dev-{device_id:05}.log"))
}

fn snap_path(dir: &Path, device_id: u16) -> PathBuf {
    dir.join(format!("dev-{device_id:05}.snap"))
}

fn read_records(path: &Path) -> Result<Vec<SensorReading>, GatewayError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    // A torn trailing record (crash mid-write) is dropped.
    let whole = bytes.len() - bytes.len() % PAYLOAD_SIZE;
    let mut out = Vec::with_capacity(whole / PAYLOAD_SIZE);
    for chunk in bytes[..whole].chunks_exact(PAYLOAD_SIZE) {
        out.push(decode_payload(chunk)?);
    }
    Ok(out)
}

impl Gateway {
    /// In-memory gateway; nothing touches disk.
    pub fn in_memory() -> Self {
        Self {
            inner: RwLock::new(Inner {
                channels: BTreeMap::new(),
                counters: IngestCounters::default(),
                logs: BTreeMap::new(),
            }),
            data_dir: None,
        }
    }

    /// Opens (or creates) a persistent gateway, replaying snapshots and logs.
    pub fn open(data_dir: &Path) -> Result<Self, GatewayError> {
        std::fs::create_dir_all(data_dir)?;
        let mut channels: BTreeMap<u16, Channel> = BTreeMap::new();
        for entry in std::fs::read_dir(data_dir)? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            let Some(device_id) = name
                .strip_prefix("dev-")
                .and_then(|r| r.strip_suffix(".log").or_else(|| r.strip_suffix(".snap")))
                .and_then(|id| id.parse::<u16>().ok())
            else {
                continue;
            };
            channels.entry(device_id).or_default();
        }
        for (&device_id, channel) in &mut channels {
            let snap = snap_path(data_dir, device_id);
            if snap.exists() {
                channel.readings.extend(read_records(&snap)?);
            }
            let log = log_path(data_dir, device_id);
            if log.exists() {
                channel.readings.extend(read_records(&log)?);
            }
        }
        Ok(Self {
            inner: RwLock::new(Inner {
                channels,
                counters: IngestCounters::default(),
                logs: BTreeMap::new(),
            }),
            data_dir: Some(data_dir.to_path_buf()),
        })
    }

    /// Registers static site information for the device listing.
    pub fn set_meta(&self, device_id: u16, meta: ChannelMeta) {
        let mut inner = self.inner.write().unwrap();
        inner.channels.entry(device_id).or_default().meta = meta;
    }

    /// Decodes, verifies and appends one frame. Returns the accepted reading
    /// count; on any decode error the frame is rejected, the error counter
    /// moves, and the connection-level caller keeps going.
    pub fn handle_frame(&self, bytes: &[u8]) -> Result<u16, GatewayError> {
        let frame = match decode_frame(bytes) {
            Ok(f) => f,
            Err(e) => {
                self.inner.write().unwrap().counters.frames_rejected += 1;
                return Err(e.into());
            }
        };
        let mut inner = self.inner.write().unwrap();
        if let Some(dir) = &self.data_dir {
            let writer = match inner.logs.entry(frame.device_id) {
                std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::btree_map::Entry::Vacant(e) => {
                    let file = OpenOptions::new()
                        .create(true)
                        .append(true)
                        .open(log_path(dir, frame.device_id))?;
                    e.insert(BufWriter::new(file))
                }
            };
            for reading in &frame.readings {
                writer.write_all(&encode_payload(reading))?;
            }
            writer.flush()?;
        }
        let count = frame.readings.len() as u16;
        let channel = inner.channels.entry(frame.device_id).or_default();
        channel.readings.extend_from_slice(&frame.readings);
        inner.counters.frames_accepted += 1;
        inner.counters.readings_accepted += count as u64;
        Ok(count)
    }

    /// Compacts every channel: in-memory dedup, snapshot written atomically,
    /// log truncated.
    pub fn snapshot(&self) -> Result<(), GatewayError> {
        let mut inner = self.inner.write().unwrap();
        let Some(dir) = self.data_dir.clone() else {
            return Ok(());
        };
        let ids: Vec<u16> = inner.channels.keys().copied().collect();
        for device_id in ids {
            let ordered = inner.channels[&device_id].ordered();
            let tmp = dir.join(format!("dev-{device_id:05}.snap.tmp"));
            {
                let mut w = BufWriter::new(File::create(&tmp)?);
                for reading in &ordered {
                    w.write_all(&encode_payload(reading))?;
                }
                w.flush()?;
            }
            std::fs::rename(&tmp, snap_path(&dir, device_id))?;
            // Log restarts empty; drop the cached handle so the next append
            // reopens the truncated file.
            inner.logs.remove(&device_id);
            let log = log_path(&dir, device_id);
            if log.exists() {
                File::create(&log)?;
            }
            inner.channels.get_mut(&device_id).unwrap().readings = ordered;
        }
        Ok(())
    }

    pub fn counters(&self) -> IngestCounters {
        self.inner.read().unwrap().counters
    }

    pub fn device_ids(&self) -> Vec<u16> {
        self.inner.read().unwrap().channels.keys().copied().collect()
    }

    pub fn devices(&self) -> Vec<DeviceInfo> {
        let inner = self.inner.read().unwrap();
        inner
            .channels
            .iter()
            .map(|(&device_id, ch)| {
                let ordered = ch.ordered();
                DeviceInfo {
                    device_id,
                    lat: ch.meta.lat,
                    lon: ch.meta.lon,
                    location_type: ch.meta.location_type.clone(),
                    readings: ordered.len() as u64,
                    first: ordered
                        .first()
                        .map(|r| airnet_core::timefmt::to_iso(r.created_at)),
                    last: ordered
                        .last()
                        .map(|r| airnet_core::timefmt::to_iso(r.created_at)),
                }
            })
            .collect()
    }

    /// Deduplicated reading count for one device.
    pub fn channel_len(&self, device_id: u16) -> Result<u64, GatewayError> {
        Ok(self.channel_readings(device_id)?.len() as u64)
    }

    /// Time-ordered deduplicated readings in `[from, to]` (inclusive).
    pub fn channel_readings_in(
        &self,
        device_id: u16,
        from: u64,
        to: u64,
    ) -> Result<Vec<SensorReading>, GatewayError> {
        if from > to {
            return Err(GatewayError::BadRange { from, to });
        }
        let inner = self.inner.read().unwrap();
        let channel = inner
            .channels
            .get(&device_id)
            .ok_or(GatewayError::UnknownDevice(device_id))?;
        Ok(channel
            .ordered()
            .into_iter()
            .filter(|r| r.created_at >= from && r.created_at <= to)
            .collect())
    }

    pub fn channel_readings(&self, device_id: u16) -> Result<Vec<SensorReading>, GatewayError> {
        self.channel_readings_in(device_id, 0, u64::MAX)
    }

    pub fn total_readings(&self) -> u64 {
        let inner = self.inner.read().unwrap();
        inner.channels.values().map(|c| c.ordered().len() as u64).sum()
    }
}
