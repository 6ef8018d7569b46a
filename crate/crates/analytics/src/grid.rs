//! IDW interpolation rasters.

use std::io::Write;

use serde::Serialize;

use airnet_core::idw::idw;
use airnet_core::pollutant::Pollutant;
use airnet_core::{Bbox, Point};

use crate::AnalyticsError;

/// A regular lat/lon raster of interpolated concentrations. Cells are
/// row-major with `ix` running west to east and `iy` south to north:
/// `cells[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub bbox: Bbox,
    pub nx: usize,
    pub ny: usize,
    pub cells: Vec<f64>,
    pub timestamp: u64,
    pub pollutant: Pollutant,
}

impl Grid {
    pub fn cell_center(&self, ix: usize, iy: usize) -> Point {
        Point {
            lat: self.bbox.min.lat
                + (iy as f64 + 0.5) / self.ny as f64 * (self.bbox.max.lat - self.bbox.min.lat),
            lon: self.bbox.min.lon
                + (ix as f64 + 0.5) / self.nx as f64 * (self.bbox.max.lon - self.bbox.min.lon),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.cells.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.cells.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean_value(&self) -> f64 {
        self.cells.iter().sum::<f64>() / self.cells.len() as f64
    }
}

/// Evaluates IDW at every cell center, in a fixed row-major order so results
/// are bit-for-bit reproducible.
pub fn idw_grid(
    samples: &[(Point, f64)],
    bbox: &Bbox,
    nx: usize,
    ny: usize,
    power: f64,
    timestamp: u64,
    pollutant: Pollutant,
) -> Result<Grid, AnalyticsError> {
    if nx < 2 || ny < 2 {
        return Err(AnalyticsError::GridTooSmall { nx, ny });
    }
    let mut grid = Grid {
        bbox: *bbox,
        nx,
        ny,
        cells: Vec::with_capacity(nx * ny),
        timestamp,
        pollutant,
    };
    for iy in 0..ny {
        for ix in 0..nx {
            let target = grid.cell_center(ix, iy);
            grid.cells.push(idw(samples, target, power)?);
        }
    }
    Ok(grid)
}

/// `lat,lon,value` rows in storage order.
pub fn write_grid_csv<W: Write>(grid: &Grid, out: W) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lat", "lon", "value"])
        .map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            let p = grid.cell_center(ix, iy);
            w.write_record([
                p.lat.to_string(),
                p.lon.to_string(),
                grid.cells[iy * grid.nx + ix].to_string(),
            ])
            .map_err(|e| AnalyticsError::Csv(e.to_string()))?;
        }
    }
    w.flush().map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    Ok(())
}

/// 8-bit binary PGM heatmap. Values scale linearly from the grid minimum
/// (0) to the maximum (255); a constant grid renders as 0. The scaling is
/// recorded in a comment line, and rows are written north-first so the
/// image is map-oriented.
pub fn write_grid_pgm<W: Write>(grid: &Grid, mut out: W) -> Result<(), AnalyticsError> {
    let (lo, hi) = (grid.min_value(), grid.max_value());
    let span = hi - lo;
    write!(
        out,
        "P5\n# min={lo} max={hi} pollutant={} t={}\n{} {}\n255\n",
        grid.pollutant, grid.timestamp, grid.nx, grid.ny
    )
    .map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    let mut bytes = Vec::with_capacity(grid.nx * grid.ny);
    for iy in (0..grid.ny).rev() {
        for ix in 0..grid.nx {
            let v = grid.cells[iy * grid.nx + ix];
            let scaled = if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            bytes.push(scaled);
        }
    }
    out.write_all(&bytes)
        .map_err(|e| AnalyticsError::Csv(e.to_string()))?;
    Ok(())
}
