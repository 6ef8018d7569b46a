//! The pipeline stages behind the subcommands.
//!
//! `run` chains exactly these functions over the same files, so a full run
//! and a manual stage-by-stage invocation produce identical trees.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use airnet_analytics::{
    correlation_vs_distance, fit_correlation_decay, idw_grid, sparse_subset_rmse, spread_subset,
    write_correlation_csv, write_grid_csv, write_grid_pgm, CorrelationPoint, DecayFit, Grid,
};
use airnet_core::pollutant::Pollutant;
use airnet_core::season::{Season, SeasonCalendar};
use airnet_core::series::{bucket_means, bucket_start};
use airnet_core::timefmt::to_iso;
use airnet_core::Point;
use airnet_gateway::{export_csv, import_csv, read_deployment_csv, Gateway, SiteRecord};
use airnet_pipeline::io::{read_clean_csv, write_clean_csv, write_models_csv, CleanRow};
use airnet_pipeline::{
    apply_calibration, clean_series, fit_calibration, seasonal_stats, CalibrationModel, Stage,
    TimeSeries,
};
use airnet_sim::fleet::{run_fleet, FleetObserver, FleetSummary};
use airnet_sim::truth_csv::{read_truth_csv, TruthRow, TruthWriter};
use airnet_sim::Runtime;

use crate::error::CliError;

pub fn device_file_name(device_id: u16) -> String {
    format!("dev-{device_id:05}.csv")
}

fn device_id_from_path(path: &Path) -> Option<u16> {
    path.file_stem()?
        .to_str()?
        .strip_prefix("dev-")?
        .parse()
        .ok()
}

/// Sorted `dev-*.csv` files of a directory.
fn device_files(dir: &Path) -> Result<Vec<(u16, PathBuf)>, CliError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)
        .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?
    {
        let path = entry?.path();
        if let Some(id) = device_id_from_path(&path) {
            out.push((id, path));
        }
    }
    out.sort_by_key(|(id, _)| *id);
    Ok(out)
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Serialize)]
pub struct DeviceIngestStats {
    pub device_id: u16,
    pub sensed: u64,
    pub dropped: u64,
    pub buffered_at_end: u64,
    pub stored: u64,
}

#[derive(Debug, Serialize)]
pub struct IngestReport {
    pub total_sensed: u64,
    pub total_dropped: u64,
    pub total_buffered_at_end: u64,
    pub total_stored: u64,
    /// stored == sensed - dropped - buffered_at_end
    pub conserved: bool,
    pub frames_accepted: u64,
    pub frames_rejected: u64,
    pub devices: Vec<DeviceIngestStats>,
}

struct SimulateObserver<'a> {
    gateway: &'a Gateway,
    truth_writers: BTreeMap<u16, TruthWriter<BufWriter<File>>>,
}

impl FleetObserver for SimulateObserver<'_> {
    fn frame(&mut self, bytes: &[u8]) {
        self.gateway
            .handle_frame(bytes)
            .expect("simulated frames are well-formed");
    }

    fn truth(&mut self, device_id: u16, lat: f64, lon: f64, t: u64, pm10: f64, pm25: f64) {
        if let Some(w) = self.truth_writers.get_mut(&device_id) {
            w.write(&TruthRow { t, lat, lon, pm10, pm25 })
                .expect("truth csv writable");
        }
    }
}

/// Runs the fleet against an in-memory gateway and writes `deployment.csv`,
/// `truth/`, `raw/` and `stats/ingest.json` under `out`.
pub fn stage_simulate(runtime: &Runtime, out: &Path) -> Result<IngestReport, CliError> {
    std::fs::create_dir_all(out.join("truth"))?;
    std::fs::create_dir_all(out.join("raw"))?;
    std::fs::create_dir_all(out.join("stats"))?;

    let sites: Vec<SiteRecord> = runtime
        .deployment
        .sites
        .iter()
        .map(|s| SiteRecord {
            device_id: s.device_id,
            lat: s.point.lat,
            lon: s.point.lon,
            location_type: s.location_type.to_string(),
        })
        .collect();
    airnet_gateway::write_deployment_csv(&sites, File::create(out.join("deployment.csv"))?)?;

    let gateway = Gateway::in_memory();
    let mut truth_writers = BTreeMap::new();
    for site in &runtime.deployment.sites {
        let file = File::create(out.join("truth").join(device_file_name(site.device_id)))?;
        truth_writers.insert(
            site.device_id,
            TruthWriter::new(BufWriter::new(file)).map_err(CliError::runtime)?,
        );
    }
    let mut observer = SimulateObserver {
        gateway: &gateway,
        truth_writers,
    };
    let summary = run_fleet(runtime, &mut observer);
    for (_, writer) in observer.truth_writers {
        writer.finish().map_err(CliError::runtime)?;
    }

    for site in &runtime.deployment.sites {
        let readings = gateway
            .channel_readings(site.device_id)
            .unwrap_or_default();
        let file = File::create(out.join("raw").join(device_file_name(site.device_id)))?;
        export_csv(&readings, BufWriter::new(file))?;
    }

    let report = ingest_report(&gateway, &summary);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    std::fs::write(out.join("stats").join("ingest.json"), json)?;
    Ok(report)
}

pub fn ingest_report(gateway: &Gateway, summary: &FleetSummary) -> IngestReport {
    let devices: Vec<DeviceIngestStats> = summary
        .devices
        .iter()
        .map(|d| DeviceIngestStats {
            device_id: d.device_id,
            sensed: d.sensed,
            dropped: d.dropped,
            buffered_at_end: d.buffered_at_end,
            stored: gateway.channel_len(d.device_id).unwrap_or(0),
        })
        .collect();
    let total_stored: u64 = devices.iter().map(|d| d.stored).sum();
    let counters = gateway.counters();
    IngestReport {
        total_sensed: summary.total_sensed(),
        total_dropped: summary.total_dropped(),
        total_buffered_at_end: summary.total_buffered_at_end(),
        total_stored,
        conserved: total_stored
            == summary.total_sensed() - summary.total_dropped() - summary.total_buffered_at_end(),
        frames_accepted: counters.frames_accepted,
        frames_rejected: counters.frames_rejected,
        devices,
    }
}

// ------------------------------------------------------------------- clean

/// Cleans one gateway export. The row stage is `interp` when either
/// pollutant was re-estimated for that timestamp.
pub fn clean_file(input: &Path, output: &Path) -> Result<usize, CliError> {
    let readings = import_csv(File::open(input)?)?;
    let device_id = device_id_from_path(input).unwrap_or(0);
    let grid: Vec<u64> = readings.iter().map(|r| r.created_at).collect();
    let pm10 = TimeSeries::new(
        device_id,
        readings.iter().map(|r| (r.created_at, r.pm10 as f64)).collect(),
    )?;
    let pm25 = TimeSeries::new(
        device_id,
        readings.iter().map(|r| (r.created_at, r.pm25 as f64)).collect(),
    )?;
    let rh = TimeSeries::new(
        device_id,
        readings.iter().map(|r| (r.created_at, r.rh as f64)).collect(),
    )?;
    let (clean10, _) = clean_series(&pm10, &rh)?;
    let (clean25, _) = clean_series(&pm25, &rh)?;

    let rows: Vec<CleanRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| CleanRow {
            t,
            pm10: clean10.series.points[i].1,
            pm25: clean25.series.points[i].1,
            temp: readings[i].temp as f64,
            rh: readings[i].rh as f64,
            stage: if clean10.stages[i] == Stage::Clean && clean25.stages[i] == Stage::Clean {
                Stage::Clean
            } else {
                Stage::Interp
            },
        })
        .collect();
    write_clean_csv(&rows, BufWriter::new(File::create(output)?))?;
    Ok(rows.len())
}

/// Directory mode: cleans every `dev-*.csv`.
pub fn stage_clean(raw_dir: &Path, out_dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    for (id, path) in device_files(raw_dir)? {
        clean_file(&path, &out_dir.join(device_file_name(id)))?;
    }
    Ok(())
}

// --------------------------------------------------------------- calibrate

/// Minimum rows for a seasonal fit; smaller windows are skipped with a
/// warning rather than producing garbage coefficients.
const MIN_FIT_POINTS: usize = 24;

/// Paired (raw, reference) points for one season and pollutant.
type PairedSeries = (Vec<(u64, f64)>, Vec<(u64, f64)>);

/// Fits per-device, per-season, per-pollutant calibration models from
/// cleaned data (measured rows only) against the ground-truth traces.
pub fn stage_calibrate_fit(
    clean_dir: &Path,
    truth_dir: &Path,
    calendar: &SeasonCalendar,
    out_file: &Path,
) -> Result<Vec<CalibrationModel>, CliError> {
    let mut models = Vec::new();
    for (device_id, clean_path) in device_files(clean_dir)? {
        let truth_path = truth_dir.join(device_file_name(device_id));
        let rows = read_clean_csv(File::open(&clean_path)?)?;
        let truth = read_truth_csv(File::open(&truth_path).map_err(|e| {
            CliError::runtime(format!("{}: {e}", truth_path.display()))
        })?)
        .map_err(CliError::runtime)?;
        let truth_by_t: BTreeMap<u64, &TruthRow> = truth.iter().map(|r| (r.t, r)).collect();

        let mut groups: BTreeMap<(Season, Pollutant), PairedSeries> = BTreeMap::new();
        for row in rows.iter().filter(|r| r.stage == Stage::Clean) {
            let Some(truth_row) = truth_by_t.get(&row.t) else {
                continue;
            };
            let season = calendar.season_for_month(month_of(row.t));
            for (pollutant, raw, reference) in [
                (Pollutant::Pm10, row.pm10, truth_row.pm10),
                (Pollutant::Pm25, row.pm25, truth_row.pm25),
            ] {
                let slot = groups.entry((season, pollutant)).or_default();
                slot.0.push((row.t, raw));
                slot.1.push((row.t, reference));
            }
        }
        for ((season, pollutant), (raw, reference)) in groups {
            if raw.len() < MIN_FIT_POINTS {
                eprintln!(
                    "calibrate: skipping device {device_id} {season} {pollutant}: only {} usable points",
                    raw.len()
                );
                continue;
            }
            let raw_series = TimeSeries::new(device_id, raw)?;
            let ref_series = TimeSeries::new(device_id, reference)?;
            match fit_calibration(&raw_series, &ref_series, season, pollutant) {
                Ok(fit) => models.push(fit.model),
                Err(e) => eprintln!(
                    "calibrate: skipping device {device_id} {season} {pollutant}: {e}"
                ),
            }
        }
    }
    models.sort_by_key(|m| (m.device_id, m.season, m.pollutant));
    write_models_csv(&models, BufWriter::new(File::create(out_file)?))?;
    Ok(models)
}

/// Applies fitted models to cleaned files, producing calibrated files with
/// the same grid and `stage = calibrated`.
pub fn stage_calibrate_apply(
    clean_dir: &Path,
    models: &[CalibrationModel],
    calendar: &SeasonCalendar,
    out_dir: &Path,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    let by_key: BTreeMap<(u16, Season, Pollutant), &CalibrationModel> = models
        .iter()
        .map(|m| ((m.device_id, m.season, m.pollutant), m))
        .collect();
    for (device_id, path) in device_files(clean_dir)? {
        let rows = read_clean_csv(File::open(&path)?)?;
        let mut out_rows: Vec<CleanRow> = rows
            .iter()
            .map(|r| CleanRow {
                stage: Stage::Calibrated,
                ..*r
            })
            .collect();

        // Calibrate season by season so the library op sees homogeneous
        // series, then scatter the values back onto the grid.
        let mut by_season: BTreeMap<Season, Vec<usize>> = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            by_season
                .entry(calendar.season_for_month(month_of(row.t)))
                .or_default()
                .push(i);
        }
        for (season, indices) in by_season {
            for pollutant in Pollutant::ALL {
                let model = by_key.get(&(device_id, season, pollutant)).ok_or_else(|| {
                    CliError::runtime(format!(
                        "no calibration model for device {device_id} {season} {pollutant}"
                    ))
                })?;
                let points = indices
                    .iter()
                    .map(|&i| {
                        (
                            rows[i].t,
                            match pollutant {
                                Pollutant::Pm10 => rows[i].pm10,
                                Pollutant::Pm25 => rows[i].pm25,
                            },
                        )
                    })
                    .collect();
                let series = TimeSeries::new(device_id, points)?;
                let calibrated = apply_calibration(&series, model, calendar)?;
                for (&i, &(_, value)) in indices.iter().zip(&calibrated.points) {
                    match pollutant {
                        Pollutant::Pm10 => out_rows[i].pm10 = value,
                        Pollutant::Pm25 => out_rows[i].pm25 = value,
                    }
                }
            }
        }
        write_clean_csv(
            &out_rows,
            BufWriter::new(File::create(out_dir.join(device_file_name(device_id)))?),
        )?;
    }
    Ok(())
}

// -------------------------------------------------------------- series I/O

/// Calibrated (or cleaned) rows per device.
pub fn load_series_dir(dir: &Path) -> Result<BTreeMap<u16, Vec<CleanRow>>, CliError> {
    let mut out = BTreeMap::new();
    for (id, path) in device_files(dir)? {
        out.insert(id, read_clean_csv(File::open(&path)?)?);
    }
    Ok(out)
}

pub fn pollutant_points(rows: &[CleanRow], pollutant: Pollutant) -> Vec<(u64, f64)> {
    rows.iter()
        .map(|r| {
            (
                r.t,
                match pollutant {
                    Pollutant::Pm10 => r.pm10,
                    Pollutant::Pm25 => r.pm25,
                },
            )
        })
        .collect()
}

pub fn sites_from_csv(path: &Path) -> Result<Vec<(u16, Point)>, CliError> {
    let records = read_deployment_csv(File::open(path)?)?;
    Ok(records
        .into_iter()
        .map(|r| (r.device_id, Point { lat: r.lat, lon: r.lon }))
        .collect())
}

// -------------------------------------------------------------------- grid

pub struct GridStageOutput {
    pub grids_written: usize,
    pub sparse_rmse: Option<SparseRmse>,
}

#[derive(Debug, Serialize)]
pub struct SparseRmse {
    pub hour: String,
    pub pollutant: Pollutant,
    pub subset_size: usize,
    pub subset: Vec<u16>,
    pub rmse: f64,
}

fn compact_stamp(t: u64) -> String {
    to_iso(t).replace([':', '-'], "")
}

/// Per-device mean of one hour bucket.
fn hourly_sample(
    rows: &BTreeMap<u16, Vec<CleanRow>>,
    sites: &[(u16, Point)],
    pollutant: Pollutant,
    hour: u64,
) -> Vec<(u16, Point, f64)> {
    let mut out = Vec::new();
    for &(id, point) in sites {
        let Some(device_rows) = rows.get(&id) else {
            continue;
        };
        let in_hour: Vec<f64> = device_rows
            .iter()
            .filter(|r| bucket_start(r.t, 3_600) == hour)
            .map(|r| match pollutant {
                Pollutant::Pm10 => r.pm10,
                Pollutant::Pm25 => r.pm25,
            })
            .collect();
        if !in_hour.is_empty() {
            out.push((id, point, in_hour.iter().sum::<f64>() / in_hour.len() as f64));
        }
    }
    out
}

/// Interpolates one hour (or every hour present) for the given pollutants.
/// With `subset`, also writes the sparse grid and its RMSE against the full
/// one.
#[allow(clippy::too_many_arguments)]
pub fn stage_grid(
    deployment_csv: &Path,
    series_dir: &Path,
    hour: Option<u64>,
    pollutants: &[Pollutant],
    power: f64,
    nx: usize,
    ny: usize,
    subset: Option<(usize, u64)>,
    bbox: Option<airnet_core::Bbox>,
    out_dir: &Path,
) -> Result<GridStageOutput, CliError> {
    let sites = sites_from_csv(deployment_csv)?;
    let rows = load_series_dir(series_dir)?;
    let bbox = bbox.unwrap_or(bounding_box_of(&sites)?);

    let hours: Vec<u64> = match hour {
        Some(h) => vec![bucket_start(h, 3_600)],
        None => {
            let mut set: std::collections::BTreeSet<u64> = std::collections::BTreeSet::new();
            for device_rows in rows.values() {
                for r in device_rows {
                    set.insert(bucket_start(r.t, 3_600));
                }
            }
            set.into_iter().collect()
        }
    };

    let mut grids_written = 0usize;
    let mut sparse_out = None;
    for pollutant in pollutants {
        let dir = out_dir.join(pollutant.to_string());
        std::fs::create_dir_all(&dir)?;
        for &h in &hours {
            let samples = hourly_sample(&rows, &sites, *pollutant, h);
            if samples.is_empty() {
                continue;
            }
            let points: Vec<(Point, f64)> = samples.iter().map(|s| (s.1, s.2)).collect();
            let grid = idw_grid(&points, &bbox, nx, ny, power, h, *pollutant)?;
            write_grid(&grid, &dir.join(compact_stamp(h)))?;
            grids_written += 1;

            if let Some((k, seed)) = subset {
                let site_points: Vec<(u16, Point)> =
                    samples.iter().map(|s| (s.0, s.1)).collect();
                if k > site_points.len() {
                    return Err(CliError::config(format!(
                        "subset {k} exceeds the {} reporting devices",
                        site_points.len()
                    )));
                }
                let chosen = spread_subset(&site_points, k, seed);
                let by_id: BTreeMap<u16, (Point, f64)> =
                    samples.iter().map(|s| (s.0, (s.1, s.2))).collect();
                let (sparse_grid, rmse) = sparse_subset_rmse(&grid, &by_id, &chosen, power)?;
                write_grid(&sparse_grid, &dir.join(format!("{}-subset{k}", compact_stamp(h))))?;
                grids_written += 1;
                let record = SparseRmse {
                    hour: to_iso(h),
                    pollutant: *pollutant,
                    subset_size: k,
                    subset: chosen,
                    rmse,
                };
                std::fs::write(
                    dir.join(format!("{}-subset{k}-rmse.json", compact_stamp(h))),
                    serde_json::to_string_pretty(&record).expect("serializes"),
                )?;
                sparse_out = Some(record);
            }
        }
    }
    Ok(GridStageOutput {
        grids_written,
        sparse_rmse: sparse_out,
    })
}

fn write_grid(grid: &Grid, base: &Path) -> Result<(), CliError> {
    write_grid_csv(grid, BufWriter::new(File::create(base.with_extension("csv"))?))?;
    write_grid_pgm(grid, BufWriter::new(File::create(base.with_extension("pgm"))?))?;
    Ok(())
}

fn bounding_box_of(sites: &[(u16, Point)]) -> Result<airnet_core::Bbox, CliError> {
    let mut lat = (f64::INFINITY, f64::NEG_INFINITY);
    let mut lon = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, p) in sites {
        lat = (lat.0.min(p.lat), lat.1.max(p.lat));
        lon = (lon.0.min(p.lon), lon.1.max(p.lon));
    }
    // Pad by half a percent so edge devices do not sit on the border.
    let dlat = ((lat.1 - lat.0) * 0.005).max(1e-4);
    let dlon = ((lon.1 - lon.0) * 0.005).max(1e-4);
    airnet_core::geo::BoundingBox::new(
        Point { lat: lat.0 - dlat, lon: lon.0 - dlon },
        Point { lat: lat.1 + dlat, lon: lon.1 + dlon },
    )
    .map_err(CliError::config)
}

// --------------------------------------------------------------- correlate

pub fn stage_correlate(
    deployment_csv: &Path,
    series_dir: &Path,
    pollutant: Pollutant,
    min_overlap: usize,
    out_file: &Path,
) -> Result<Vec<CorrelationPoint>, CliError> {
    let sites = sites_from_csv(deployment_csv)?;
    let rows = load_series_dir(series_dir)?;
    let hourly: BTreeMap<u16, Vec<(u64, f64)>> = rows
        .iter()
        .map(|(&id, dev_rows)| (id, bucket_means(&pollutant_points(dev_rows, pollutant), 3_600)))
        .collect();
    let (points, notices) = correlation_vs_distance(&sites, &hourly, min_overlap);
    for n in &notices {
        eprintln!(
            "correlate: pair ({}, {}) skipped: {}",
            n.device_a, n.device_b, n.reason
        );
    }
    write_correlation_csv(&points, BufWriter::new(File::create(out_file)?))?;
    Ok(points)
}

// --------------------------------------------------------------------- fit

pub fn stage_fit(
    correlation_csv: &Path,
    knee_threshold: f64,
    bin_width_m: Option<f64>,
    out_file: &Path,
) -> Result<DecayFit, CliError> {
    let points = airnet_analytics::read_correlation_csv(File::open(correlation_csv)?)?;
    let fit = fit_correlation_decay(&points, knee_threshold, bin_width_m)?;
    std::fs::write(
        out_file,
        serde_json::to_string_pretty(&fit).expect("fit serializes"),
    )?;
    Ok(fit)
}

// ------------------------------------------------------------------- stats

/// `device_id,pollutant,season,mean,variance` over hourly means.
pub fn stage_seasonal_stats(
    series_dir: &Path,
    calendar: &SeasonCalendar,
    out_file: &Path,
) -> Result<(), CliError> {
    let rows = load_series_dir(series_dir)?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out_file)?));
    w.write_record(["device_id", "pollutant", "season", "mean", "variance"])
        .map_err(CliError::runtime)?;
    for (&device_id, device_rows) in &rows {
        for pollutant in Pollutant::ALL {
            let series = TimeSeries::new(device_id, pollutant_points(device_rows, pollutant))?;
            for (season, (mean, variance)) in seasonal_stats(&series, calendar) {
                w.write_record([
                    device_id.to_string(),
                    pollutant.to_string(),
                    season.to_string(),
                    mean.to_string(),
                    variance.to_string(),
                ])
                .map_err(CliError::runtime)?;
            }
        }
    }
    w.flush().map_err(CliError::runtime)?;
    Ok(())
}

pub(crate) fn month_of(t: u64) -> u32 {
    use chrono::Datelike;
    chrono::DateTime::from_timestamp(t as i64, 0)
        .expect("timestamp in range")
        .month()
}
