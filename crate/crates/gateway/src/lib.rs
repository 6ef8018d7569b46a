//! Telemetry gateway.
//!
//! Devices push CRC-framed readings over a length-prefixed byte stream; the
//! gateway keeps one append-only channel per device (backed by an on-disk
//! log plus periodic snapshots when a data directory is configured) and
//! serves aggregation queries and CSV exports over a minimal HTTP API.
//!
//! Ingest appends as frames arrive; ordering and duplicate collapse happen
//! on the query path, keeping the hot path allocation-light.

mod csvio;
mod http;
mod ingest;
mod query;
mod store;

pub use csvio::{export_csv, import_csv, read_deployment_csv, write_deployment_csv, SiteRecord};
pub use http::serve_http;
pub use ingest::{serve_ingest, ServerHandle};
pub use query::{query, query_series, AggPoint, Aggregation, QueryRequest};
pub use store::{ChannelMeta, DeviceInfo, Gateway, IngestCounters};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("frame rejected: {0}")]
    Wire(#[from] airnet_proto::WireError),
    #[error("unknown device {0}")]
    UnknownDevice(u16),
    #[error("bad time range: from {from} > to {to}")]
    BadRange { from: u64, to: u64 },
    #[error("bad query: {0}")]
    BadQuery(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(String),
}
