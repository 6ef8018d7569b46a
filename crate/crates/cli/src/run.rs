//! The end-to-end scenario run: simulate, clean, calibrate, grid, correlate,
//! fit, manifest.

use std::path::Path;

use airnet_core::pollutant::Pollutant;
use airnet_sim::Scenario;

use crate::error::CliError;
use crate::manifest::write_manifest;
use crate::stages;

pub struct RunOutcome {
    pub manifest_sha256: String,
}

pub fn run_scenario(
    scenario_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
) -> Result<RunOutcome, CliError> {
    let scenario = Scenario::from_path(scenario_path)?;
    let runtime = scenario.build(seed_override)?;
    std::fs::create_dir_all(out_dir)?;

    println!(
        "run: {} devices, {} ticks at {} s, seed {}",
        runtime.deployment.sites.len(),
        runtime.tick_count(),
        runtime.sample_period_s,
        runtime.seed
    );

    let report = stages::stage_simulate(&runtime, out_dir)?;
    println!(
        "simulate: {} sensed, {} stored, {} dropped, {} still buffered",
        report.total_sensed, report.total_stored, report.total_dropped, report.total_buffered_at_end
    );

    stages::stage_clean(&out_dir.join("raw"), &out_dir.join("clean"))?;
    println!("clean: wrote clean/");

    std::fs::create_dir_all(out_dir.join("models"))?;
    let models = stages::stage_calibrate_fit(
        &out_dir.join("clean"),
        &out_dir.join("truth"),
        &runtime.calendar,
        &out_dir.join("models").join("calibration.csv"),
    )?;
    println!("calibrate: fitted {} models", models.len());

    stages::stage_calibrate_apply(
        &out_dir.join("clean"),
        &models,
        &runtime.calendar,
        &out_dir.join("calibrated"),
    )?;
    println!("calibrate: wrote calibrated/");

    // The raster region comes from deployment.csv, exactly as the `grid`
    // subcommand derives it, so a manual stage-by-stage replay matches.
    let grid_out = stages::stage_grid(
        &out_dir.join("deployment.csv"),
        &out_dir.join("calibrated"),
        None,
        &Pollutant::ALL,
        runtime.analytics.idw_power,
        runtime.analytics.grid_nx,
        runtime.analytics.grid_ny,
        None,
        None,
        &out_dir.join("grids"),
    )?;
    println!("grid: wrote {} rasters", grid_out.grids_written);

    std::fs::create_dir_all(out_dir.join("correlation"))?;
    std::fs::create_dir_all(out_dir.join("fit"))?;
    for pollutant in Pollutant::ALL {
        let correlation_csv = out_dir.join("correlation").join(format!("{pollutant}.csv"));
        let points = stages::stage_correlate(
            &out_dir.join("deployment.csv"),
            &out_dir.join("calibrated"),
            pollutant,
            runtime.analytics.min_overlap_hours,
            &correlation_csv,
        )?;
        println!("correlate: {pollutant}: {} pairs", points.len());

        match stages::stage_fit(
            &correlation_csv,
            runtime.analytics.knee_threshold,
            runtime.analytics.bin_width_m,
            &out_dir.join("fit").join(format!("{pollutant}.json")),
        ) {
            Ok(fit) => println!(
                "fit: {pollutant}: a={:.4} b={:.6} c={:.4} d={:.6} rmse={:.4} knee={} m",
                fit.a, fit.b, fit.c, fit.d, fit.residual_rmse, fit.knee_m
            ),
            Err(e) => {
                // Short runs may not span enough distance for a stable fit;
                // the rest of the artifact tree is still valid.
                eprintln!("fit: {pollutant}: {e}");
            }
        }
    }

    stages::stage_seasonal_stats(
        &out_dir.join("calibrated"),
        &runtime.calendar,
        &out_dir.join("stats").join("seasonal.csv"),
    )?;

    let scenario_name = scenario_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let manifest_sha256 = write_manifest(out_dir, runtime.seed, &scenario_name)?;
    println!("manifest: sha256 {manifest_sha256}");
    Ok(RunOutcome { manifest_sha256 })
}
