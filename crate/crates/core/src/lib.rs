//! Scalar-generic numerics shared by the airnet workspace.
//!
//! Every routine in this crate is generic over [`float::Float`] (`f32` or
//! `f64` via `num-traits`), so the math is independent of the storage width
//! used elsewhere. The type aliases below pin the `f64` instantiations the
//! rest of the workspace works with.

pub mod expfit;
pub mod float;
pub mod geo;
pub mod idw;
pub mod kendall;
pub mod pollutant;
pub mod season;
pub mod seed;
pub mod series;
pub mod stats;
pub mod timefmt;

pub use float::Float;

/// WGS-84 point in `f64` degrees.
pub type Point = geo::GeoPoint<f64>;
/// Axis-aligned lat/lon box in `f64` degrees.
pub type Bbox = geo::BoundingBox<f64>;
/// Quartiles and 1.5-IQR fences over `f64` samples.
pub type Quartiles = stats::IqrBounds<f64>;
/// Ordinary least-squares line fit over `f64` samples.
pub type LineFit = stats::LinearFit<f64>;
/// Two-term exponential decay model over `f64`.
pub type ExpFit = expfit::TwoTermExp<f64>;
