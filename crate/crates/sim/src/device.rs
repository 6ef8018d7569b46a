//! Device firmware state machine.
//!
//! Every sample period the device senses once and checks connectivity. When
//! online it transmits immediately; a non-empty offline backlog goes out
//! first, in FIFO order, chunked into bulk frames, with the current reading
//! last so the stream stays globally time-ordered. When offline it caches
//! the reading in a bounded buffer, evicting the oldest entry once the cap
//! is reached.

use std::collections::VecDeque;

use thiserror::Error;

use airnet_proto::{Frame, SensorReading, MAX_READINGS_PER_FRAME};

/// Offline cache capacity in readings.
pub const BUFFER_CAPACITY: usize = 20_000;
/// Sensing cadence in seconds.
pub const SAMPLE_PERIOD_S: u64 = 30;

#[derive(Debug, Error, PartialEq)]
pub enum OutageError {
    #[error("outage interval must have start < end")]
    EmptyInterval,
    #[error("outage intervals overlap at {0}")]
    Overlap(u64),
}

/// Connectivity loss windows, half-open `[start, end)`, sorted and disjoint.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutageSchedule {
    intervals: Vec<(u64, u64)>,
}

impl OutageSchedule {
    pub fn new(mut intervals: Vec<(u64, u64)>) -> Result<Self, OutageError> {
        intervals.sort_unstable();
        for window in intervals.windows(2) {
            if window[0].1 > window[1].0 {
                return Err(OutageError::Overlap(window[1].0));
            }
        }
        if intervals.iter().any(|&(s, e)| s >= e) {
            return Err(OutageError::EmptyInterval);
        }
        Ok(Self { intervals })
    }

    pub fn always_online() -> Self {
        Self::default()
    }

    pub fn offline_at(&self, t: u64) -> bool {
        match self.intervals.binary_search_by(|&(s, _)| s.cmp(&t)) {
            Ok(_) => true,
            Err(0) => false,
            Err(i) => t < self.intervals[i - 1].1,
        }
    }

    pub fn intervals(&self) -> &[(u64, u64)] {
        &self.intervals
    }
}

/// Firmware state of one device.
#[derive(Debug, Clone)]
pub struct DeviceState {
    pub device_id: u16,
    buffer: VecDeque<SensorReading>,
    capacity: usize,
    pub sample_period_s: u64,
    /// Readings evicted from the full buffer, oldest first.
    pub drops: u64,
    /// Readings sensed since construction.
    pub sensed: u64,
}

impl DeviceState {
    pub fn new(device_id: u16) -> Self {
        Self::with_capacity(device_id, BUFFER_CAPACITY, SAMPLE_PERIOD_S)
    }

    /// Smaller capacities keep unit tests fast; production code uses
    /// [`BUFFER_CAPACITY`].
    pub fn with_capacity(device_id: u16, capacity: usize, sample_period_s: u64) -> Self {
        assert!(capacity > 0 && sample_period_s > 0);
        Self {
            device_id,
            buffer: VecDeque::with_capacity(capacity.min(4096)),
            capacity,
            sample_period_s,
            drops: 0,
            sensed: 0,
        }
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Advances one sample period. `reading.created_at` must equal `now`,
    /// and `now` must sit on the sample grid.
    pub fn tick(&mut self, now: u64, reading: SensorReading, online: bool) -> Vec<Frame> {
        assert_eq!(now % self.sample_period_s, 0, "tick off the sample grid");
        assert_eq!(reading.created_at, now, "reading timestamp must be the tick time");
        self.sensed += 1;

        let frames = if online {
            if self.buffer.is_empty() {
                vec![Frame::new(self.device_id, vec![reading])]
            } else {
                let mut backlog: Vec<SensorReading> = self.buffer.drain(..).collect();
                backlog.push(reading);
                backlog
                    .chunks(MAX_READINGS_PER_FRAME)
                    .map(|chunk| Frame::new(self.device_id, chunk.to_vec()))
                    .collect()
            }
        } else {
            if self.buffer.len() == self.capacity {
                self.buffer.pop_front();
                self.drops += 1;
            }
            self.buffer.push_back(reading);
            Vec::new()
        };

        debug_assert!(self.buffer.len() <= self.capacity);
        frames
    }
}
