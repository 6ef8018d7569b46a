//! Deployment layouts over the monitoring region.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use airnet_core::{Bbox, Point};

#[derive(Debug, Error, PartialEq)]
pub enum DeployError {
    #[error("need at least one device")]
    NoDevices,
    #[error("{n} devices exceed the {cells} cells of the {nx}x{ny} grid")]
    TooManyDevices { n: usize, nx: usize, ny: usize, cells: usize },
    #[error("layout dense49 places exactly 49 devices, got {0}")]
    NotFortyNine(usize),
}

/// Site category of a deployed device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LocationType {
    /// Urban region.
    L1,
    /// Semi-urban region.
    L2,
    /// Green region.
    L3,
    /// Traffic junctions and roadside poles.
    L4,
}

impl std::fmt::Display for LocationType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LocationType::L1 => "L1",
            LocationType::L2 => "L2",
            LocationType::L3 => "L3",
            LocationType::L4 => "L4",
        })
    }
}

impl std::str::FromStr for LocationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "L1" => Ok(LocationType::L1),
            "L2" => Ok(LocationType::L2),
            "L3" => Ok(LocationType::L3),
            "L4" => Ok(LocationType::L4),
            other => Err(format!("unknown location type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSite {
    pub device_id: u16,
    pub point: Point,
    pub location_type: LocationType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentMap {
    pub bbox: Bbox,
    pub sites: Vec<DeviceSite>,
}

impl DeploymentMap {
    pub fn site(&self, device_id: u16) -> Option<&DeviceSite> {
        self.sites.iter().find(|s| s.device_id == device_id)
    }
}

/// Placement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "layout")]
pub enum Layout {
    /// Devices at the centers of an `nx` x `ny` cell grid (defaults to the
    /// smallest square that fits).
    Grid {
        #[serde(default)]
        nx: Option<usize>,
        #[serde(default)]
        ny: Option<usize>,
    },
    /// The reference 49-device field study: a 7x7 grid of ~400 m boxes over
    /// a 2 km square with location types in the study's proportions
    /// (11 urban, 6 semi-urban, 16 green, 16 roadside).
    #[serde(alias = "paper49")]
    Dense49,
    /// Every device at the region center: a calibration bench next to the
    /// reference instrument.
    Colocated,
    /// Uniform random placement.
    Random { seed: u64 },
}

/// Distribution of location types for the 49-site reference layout.
const DENSE49_TYPE_COUNTS: [(LocationType, usize); 4] = [
    (LocationType::L1, 11),
    (LocationType::L2, 6),
    (LocationType::L3, 16),
    (LocationType::L4, 16),
];

fn cell_center(bbox: &Bbox, nx: usize, ny: usize, ix: usize, iy: usize) -> Point {
    let fx = (ix as f64 + 0.5) / nx as f64;
    let fy = (iy as f64 + 0.5) / ny as f64;
    Point {
        lat: bbox.min.lat + fy * (bbox.max.lat - bbox.min.lat),
        lon: bbox.min.lon + fx * (bbox.max.lon - bbox.min.lon),
    }
}

const CYCLED_TYPES: [LocationType; 4] = [
    LocationType::L1,
    LocationType::L2,
    LocationType::L3,
    LocationType::L4,
];

/// Generates device sites for `n` devices inside `bbox`.
pub fn generate_deployment(
    bbox: &Bbox,
    n: usize,
    layout: &Layout,
) -> Result<DeploymentMap, DeployError> {
    if n == 0 {
        return Err(DeployError::NoDevices);
    }
    let sites = match layout {
        Layout::Grid { nx, ny } => {
            let side = (n as f64).sqrt().ceil() as usize;
            let nx = nx.unwrap_or(side);
            let ny = ny.unwrap_or(side.max(n.div_ceil(nx.max(1))));
            let cells = nx * ny;
            if n > cells {
                return Err(DeployError::TooManyDevices { n, nx, ny, cells });
            }
            (0..n)
                .map(|i| DeviceSite {
                    device_id: (i + 1) as u16,
                    point: cell_center(bbox, nx, ny, i % nx, i / nx),
                    location_type: CYCLED_TYPES[i % 4],
                })
                .collect()
        }
        Layout::Dense49 => {
            if n != 49 {
                return Err(DeployError::NotFortyNine(n));
            }
            let mut types = Vec::with_capacity(49);
            for (ty, count) in DENSE49_TYPE_COUNTS {
                types.extend(std::iter::repeat_n(ty, count));
            }
            // Fixed internal seed: the reference map is always the same.
            let mut rng = ChaCha12Rng::seed_from_u64(49);
            types.shuffle(&mut rng);
            (0..49)
                .map(|i| DeviceSite {
                    device_id: (i + 1) as u16,
                    point: cell_center(bbox, 7, 7, i % 7, i / 7),
                    location_type: types[i],
                })
                .collect()
        }
        Layout::Colocated => (0..n)
            .map(|i| DeviceSite {
                device_id: (i + 1) as u16,
                point: bbox.center(),
                location_type: CYCLED_TYPES[i % 4],
            })
            .collect(),
        Layout::Random { seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(*seed);
            (0..n)
                .map(|i| DeviceSite {
                    device_id: (i + 1) as u16,
                    point: Point {
                        lat: rng.random_range(bbox.min.lat..bbox.max.lat),
                        lon: rng.random_range(bbox.min.lon..bbox.max.lon),
                    },
                    location_type: CYCLED_TYPES[i % 4],
                })
                .collect()
        }
    };
    Ok(DeploymentMap { bbox: *bbox, sites })
}
