//! Long-running gateway process (wall-clock mode).
//!
//! Scenario runs use an in-process gateway on the simulated clock; this
//! command is the demo/deployment path: it binds real sockets, snapshots on
//! a wall-clock timer and runs until killed. Appends are flushed per frame,
//! so a hard kill loses nothing that was acked.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use airnet_gateway::{read_deployment_csv, serve_http, serve_ingest, ChannelMeta, Gateway};

use crate::error::CliError;

pub fn serve(
    data_dir: &Path,
    ingest_addr: &str,
    http_addr: &str,
    deployment: Option<&Path>,
    snapshot_interval_s: u64,
) -> Result<(), CliError> {
    let gateway = Arc::new(Gateway::open(data_dir)?);
    if let Some(path) = deployment {
        let sites = read_deployment_csv(
            std::fs::File::open(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
        )?;
        for s in &sites {
            gateway.set_meta(
                s.device_id,
                ChannelMeta {
                    lat: Some(s.lat),
                    lon: Some(s.lon),
                    location_type: Some(s.location_type.clone()),
                },
            );
        }
        println!("serve: loaded {} device sites", sites.len());
    }

    let ingest = serve_ingest(gateway.clone(), ingest_addr)
        .map_err(|e| CliError::runtime(format!("bind ingest {ingest_addr}: {e}")))?;
    let http = serve_http(gateway.clone(), http_addr)
        .map_err(|e| CliError::runtime(format!("bind http {http_addr}: {e}")))?;
    println!("serve: ingest on {}, http on {}", ingest.addr, http.addr);

    let snapshot_gateway = gateway.clone();
    std::thread::spawn(move || loop {
        std::thread::sleep(Duration::from_secs(snapshot_interval_s.max(1)));
        if let Err(e) = snapshot_gateway.snapshot() {
            eprintln!("serve: snapshot failed: {e}");
        }
    });

    // Runs until the process is killed.
    loop {
        std::thread::sleep(Duration::from_secs(3600));
    }
}
