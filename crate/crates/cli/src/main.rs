//! `airnet`: fleet simulator, gateway and analytics for a dense PM
//! monitoring network.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use airnet_core::pollutant::Pollutant;
use airnet_core::season::SeasonCalendar;
use airnet_core::timefmt::parse_time;

use airnet_cli::error::CliError;
use airnet_cli::{run, serve, stages};

#[derive(Parser)]
#[command(name = "airnet", version, about = "Dense PM-monitoring network simulator and analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for the artifact tree.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario end to end: simulate, clean, calibrate, grid,
    /// correlate, fit, manifest.
    Run(ScenarioArgs),
    /// Simulate the fleet only: deployment, ground truth and raw exports.
    Simulate(ScenarioArgs),
    /// Serve the gateway: framed TCP ingest plus the HTTP query API.
    Serve {
        /// Directory for per-device logs and snapshots.
        #[arg(long)]
        data_dir: PathBuf,
        /// Ingest listen address.
        #[arg(long, default_value = "127.0.0.1:7400")]
        ingest: String,
        /// HTTP listen address.
        #[arg(long, default_value = "127.0.0.1:7500")]
        http: String,
        /// Deployment CSV for device metadata.
        #[arg(long)]
        deployment: Option<PathBuf>,
        /// Snapshot the store every N seconds (wall clock).
        #[arg(long, default_value_t = 60)]
        snapshot_interval_s: u64,
    },
    /// Clean a gateway export (or a directory of them): reliability filter,
    /// monthly IQR outliers, interpolation, `stage` column.
    Clean {
        /// Input CSV file or directory of dev-*.csv files.
        #[arg(long)]
        input: PathBuf,
        /// Output file (or directory, matching the input).
        #[arg(long)]
        output: PathBuf,
    },
    /// Fit or apply calibration models.
    #[command(subcommand)]
    Calibrate(CalibrateCommand),
    /// Interpolate hourly IDW grids from calibrated series.
    Grid {
        /// Deployment CSV.
        #[arg(long)]
        deployment: PathBuf,
        /// Directory of calibrated dev-*.csv files.
        #[arg(long)]
        series: PathBuf,
        /// Hour to interpolate (ISO 8601 or epoch seconds); all hours when
        /// omitted.
        #[arg(long)]
        hour: Option<String>,
        /// Pollutant to grid.
        #[arg(long, default_value = "pm10")]
        pollutant: String,
        /// IDW power.
        #[arg(long, default_value_t = 2.0)]
        power: f64,
        /// Raster size as NXxNY, e.g. 40x40.
        #[arg(long, default_value = "40x40")]
        grid: String,
        /// Also interpolate from a spread subset of K devices and report the
        /// RMSE against the full grid.
        #[arg(long)]
        subset: Option<usize>,
        /// Seed for the subset choice.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Kendall tau-b against distance for every device pair.
    Correlate {
        #[arg(long)]
        deployment: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value = "pm10")]
        pollutant: String,
        /// Minimum overlapping hourly samples per pair.
        #[arg(long, default_value_t = 24)]
        min_overlap: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the two-term exponential decay to a correlation CSV and report
    /// the knee distance.
    Fit {
        #[arg(long)]
        correlation: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        knee_threshold: f64,
        /// Bin pair distances to this width before fitting.
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CalibrateCommand {
    /// Fit per-device, per-season models from cleaned data and truth traces.
    Fit {
        /// Directory of cleaned dev-*.csv files.
        #[arg(long)]
        clean: PathBuf,
        /// Directory of ground-truth dev-*.csv traces.
        #[arg(long)]
        truth: PathBuf,
        /// Output models CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply fitted models to cleaned files.
    Apply {
        #[arg(long)]
        clean: PathBuf,
        /// Models CSV from `calibrate fit`.
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_grid_dims(s: &str) -> Result<(usize, usize), CliError> {
    let (nx, ny) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| CliError::config(format!("--grid expects NXxNY, got {s:?}")))?;
    let parse = |v: &str| {
        v.parse::<usize>()
            .map_err(|e| CliError::config(format!("--grid {s:?}: {e}")))
    };
    Ok((parse(nx)?, parse(ny)?))
}

fn parse_pollutant(s: &str) -> Result<Pollutant, CliError> {
    s.parse().map_err(CliError::Config)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            run::run_scenario(&args.scenario, &args.out, args.seed)?;
        }
        Command::Simulate(args) => {
            let scenario = airnet_sim::Scenario::from_path(&args.scenario)?;
            let runtime = scenario.build(args.seed)?;
            std::fs::create_dir_all(&args.out)?;
            let report = stages::stage_simulate(&runtime, &args.out)?;
            println!(
                "simulate: {} sensed, {} stored, {} dropped, {} still buffered",
                report.total_sensed,
                report.total_stored,
                report.total_dropped,
                report.total_buffered_at_end
            );
        }
        Command::Serve {
            data_dir,
            ingest,
            http,
            deployment,
            snapshot_interval_s,
        } => {
            serve::serve(&data_dir, &ingest, &http, deployment.as_deref(), snapshot_interval_s)?;
        }
        Command::Clean { input, output } => {
            if input.is_dir() {
                stages::stage_clean(&input, &output)?;
                println!("clean: wrote {}", output.display());
            } else {
                let rows = stages::clean_file(&input, &output)?;
                println!("clean: {} rows -> {}", rows, output.display());
            }
        }
        Command::Calibrate(CalibrateCommand::Fit { clean, truth, out }) => {
            let models =
                stages::stage_calibrate_fit(&clean, &truth, &SeasonCalendar::default(), &out)?;
            println!("calibrate fit: {} models -> {}", models.len(), out.display());
        }
        Command::Calibrate(CalibrateCommand::Apply { clean, models, out }) => {
            let models = airnet_pipeline::io::read_models_csv(
                std::fs::File::open(&models).map_err(CliError::runtime)?,
            )?;
            stages::stage_calibrate_apply(&clean, &models, &SeasonCalendar::default(), &out)?;
            println!("calibrate apply: wrote {}", out.display());
        }
        Command::Grid {
            deployment,
            series,
            hour,
            pollutant,
            power,
            grid,
            subset,
            seed,
            out,
        } => {
            let (nx, ny) = parse_grid_dims(&grid)?;
            let pollutant = parse_pollutant(&pollutant)?;
            let hour = hour
                .map(|h| parse_time(&h).map_err(CliError::Config))
                .transpose()?;
            let output = stages::stage_grid(
                &deployment,
                &series,
                hour,
                &[pollutant],
                power,
                nx,
                ny,
                subset.map(|k| (k, seed)),
                None,
                &out,
            )?;
            println!("grid: wrote {} rasters", output.grids_written);
            if let Some(sparse) = output.sparse_rmse {
                println!(
                    "grid: subset {} of devices {:?} rmse {:.4}",
                    sparse.subset_size, sparse.subset, sparse.rmse
                );
            }
        }
        Command::Correlate {
            deployment,
            series,
            pollutant,
            min_overlap,
            out,
        } => {
            let pollutant = parse_pollutant(&pollutant)?;
            let points =
                stages::stage_correlate(&deployment, &series, pollutant, min_overlap, &out)?;
            println!("correlate: {} pairs -> {}", points.len(), out.display());
        }
        Command::Fit {
            correlation,
            knee_threshold,
            bin_width,
            out,
        } => {
            let fit = stages::stage_fit(&correlation, knee_threshold, bin_width, &out)?;
            println!(
                "fit: a={:.4} b={:.6} c={:.4} d={:.6} rmse={:.4} knee={} m",
                fit.a, fit.b, fit.c, fit.d, fit.residual_rmse, fit.knee_m
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
