//! WGS-84 points, bounding boxes and great-circle distances.
//!
//! Distances use the haversine formula on a spherical Earth. At the few-km
//! scale this workspace cares about the curvature error is far below the
//! sensor siting accuracy, so no projection step is used.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::float::Float;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Error, PartialEq)]
pub enum GeoError {
    #[error("latitude {0} outside [-90, 90]")]
    InvalidLatitude(f64),
    #[error("longitude {0} outside [-180, 180]")]
    InvalidLongitude(f64),
    #[error("degenerate bounding box: min corner must be strictly south-west of max")]
    DegenerateBbox,
}

/// A WGS-84 coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint<F = f64> {
    pub lat: F,
    pub lon: F,
}

impl<F: Float> GeoPoint<F> {
    /// Builds a point, rejecting out-of-range coordinates.
    pub fn new(lat: F, lon: F) -> Result<Self, GeoError> {
        let p = Self { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let ninety = F::val(90.0);
        let one_eighty = F::val(180.0);
        if !(self.lat >= -ninety && self.lat <= ninety) {
            return Err(GeoError::InvalidLatitude(
                self.lat.to_f64().unwrap_or(f64::NAN),
            ));
        }
        if !(self.lon >= -one_eighty && self.lon <= one_eighty) {
            return Err(GeoError::InvalidLongitude(
                self.lon.to_f64().unwrap_or(f64::NAN),
            ));
        }
        Ok(())
    }

    /// Great-circle distance to `other` in meters.
    pub fn haversine(&self, other: &Self) -> F {
        let radius = F::val(EARTH_RADIUS_M);
        let two = F::val(2.0);
        let lat1 = self.lat.to_radians();
        let lat2 = other.lat.to_radians();
        let dlat = (other.lat - self.lat).to_radians();
        let dlon = (other.lon - self.lon).to_radians();

        let s = (dlat / two).sin().powi(2)
            + lat1.cos() * lat2.cos() * (dlon / two).sin().powi(2);
        radius * two * s.sqrt().min(F::one()).asin()
    }
}

/// Axis-aligned lat/lon box. `min` is the south-west corner. Boxes crossing
/// the antimeridian are not supported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox<F = f64> {
    pub min: GeoPoint<F>,
    pub max: GeoPoint<F>,
}

impl<F: Float> BoundingBox<F> {
    pub fn new(min: GeoPoint<F>, max: GeoPoint<F>) -> Result<Self, GeoError> {
        min.validate()?;
        max.validate()?;
        if !(min.lat < max.lat && min.lon < max.lon) {
            return Err(GeoError::DegenerateBbox);
        }
        Ok(Self { min, max })
    }

    /// Box of side `side_m` meters centered on `center`, sized with the
    /// equirectangular approximation (exact enough below ~10 km).
    pub fn square(center: GeoPoint<F>, side_m: F) -> Result<Self, GeoError> {
        let radius = F::val(EARTH_RADIUS_M);
        let half = side_m / F::val(2.0);
        let dlat = (half / radius).to_degrees();
        let dlon = (half / (radius * center.lat.to_radians().cos())).to_degrees();
        Self::new(
            GeoPoint {
                lat: center.lat - dlat,
                lon: center.lon - dlon,
            },
            GeoPoint {
                lat: center.lat + dlat,
                lon: center.lon + dlon,
            },
        )
    }

    pub fn center(&self) -> GeoPoint<F> {
        let two = F::val(2.0);
        GeoPoint {
            lat: (self.min.lat + self.max.lat) / two,
            lon: (self.min.lon + self.max.lon) / two,
        }
    }

    pub fn contains(&self, p: &GeoPoint<F>) -> bool {
        p.lat >= self.min.lat
            && p.lat <= self.max.lat
            && p.lon >= self.min.lon
            && p.lon <= self.max.lon
    }

    /// East/north offsets of `p` from the box center, in meters
    /// (equirectangular, scaled at the center latitude).
    pub fn local_meters(&self, p: &GeoPoint<F>) -> (F, F) {
        let radius = F::val(EARTH_RADIUS_M);
        let c = self.center();
        let east = (p.lon - c.lon).to_radians() * c.lat.to_radians().cos() * radius;
        let north = (p.lat - c.lat).to_radians() * radius;
        (east, north)
    }
}
