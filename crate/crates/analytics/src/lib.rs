//! Spatial and statistical analyses over calibrated fleet data.

pub mod correlation;
pub mod fit;
pub mod grid;
pub mod sparse;

pub use correlation::{
    correlation_vs_distance, mean_tau_where, read_correlation_csv, write_correlation_csv,
    CorrelationPoint, PairNotice,
};
pub use fit::{fit_correlation_decay, DecayFit};
pub use grid::{idw_grid, write_grid_csv, write_grid_pgm, Grid};
pub use sparse::{sparse_subset_rmse, spread_subset};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("interpolation: {0}")]
    Idw(#[from] airnet_core::idw::IdwError),
    #[error("grid needs nx, ny >= 2, got {nx}x{ny}")]
    GridTooSmall { nx: usize, ny: usize },
    #[error("grids differ in shape: {0}x{1} vs {2}x{3}")]
    GridShapeMismatch(usize, usize, usize, usize),
    #[error("subset is empty")]
    EmptySubset,
    #[error("device {0} is not part of the deployment")]
    UnknownDevice(u16),
    #[error("need at least {min_points} points spanning {min_span_m} m, got {points} over {span_m:.0} m")]
    InsufficientSpan {
        points: usize,
        span_m: f64,
        min_points: usize,
        min_span_m: f64,
    },
    #[error("decay fit failed: {0}")]
    Fit(#[from] airnet_core::expfit::FitError),
    #[error("knee rule failed: {0}")]
    Knee(#[from] airnet_core::expfit::KneeError),
    #[error("csv: {0}")]
    Csv(String),
}
