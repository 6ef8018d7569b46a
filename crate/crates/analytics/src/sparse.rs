//! Dense-versus-sparse deployment comparison.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use airnet_core::Point;

use crate::grid::{idw_grid, Grid};
use crate::AnalyticsError;

/// Picks `k` devices that are randomly seeded but spatially spread: a random
/// first pick, then greedy farthest-point selection. Mirrors a field
/// sub-deployment chosen "at random but not clustered".
pub fn spread_subset(sites: &[(u16, Point)], k: usize, seed: u64) -> Vec<u16> {
    assert!(k >= 1 && k <= sites.len(), "subset size out of range");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = vec![rng.random_range(0..sites.len())];
    while chosen.len() < k {
        let next = (0..sites.len())
            .filter(|i| !chosen.contains(i))
            .max_by(|&a, &b| {
                let da = chosen
                    .iter()
                    .map(|&c| sites[c].1.haversine(&sites[a].1))
                    .fold(f64::INFINITY, f64::min);
                let db = chosen
                    .iter()
                    .map(|&c| sites[c].1.haversine(&sites[b].1))
                    .fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .expect("k <= sites.len()");
        chosen.push(next);
    }
    let mut ids: Vec<u16> = chosen.into_iter().map(|i| sites[i].0).collect();
    ids.sort_unstable();
    ids
}

/// Interpolates a grid from only the subset devices and returns it with the
/// cell-wise RMSE against the full-deployment grid.
pub fn sparse_subset_rmse(
    full: &Grid,
    samples: &BTreeMap<u16, (Point, f64)>,
    subset: &[u16],
    power: f64,
) -> Result<(Grid, f64), AnalyticsError> {
    if subset.is_empty() {
        return Err(AnalyticsError::EmptySubset);
    }
    let mut subset_samples = Vec::with_capacity(subset.len());
    for id in subset {
        let (point, value) = samples
            .get(id)
            .ok_or(AnalyticsError::UnknownDevice(*id))?;
        subset_samples.push((*point, *value));
    }
    let sparse = idw_grid(
        &subset_samples,
        &full.bbox,
        full.nx,
        full.ny,
        power,
        full.timestamp,
        full.pollutant,
    )?;
    let rmse = grid_rmse(full, &sparse)?;
    Ok((sparse, rmse))
}

/// Cell-wise root-mean-square difference of two equally shaped grids.
pub fn grid_rmse(a: &Grid, b: &Grid) -> Result<f64, AnalyticsError> {
    if a.nx != b.nx || a.ny != b.ny {
        return Err(AnalyticsError::GridShapeMismatch(a.nx, a.ny, b.nx, b.ny));
    }
    let sse: f64 = a
        .cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    Ok((sse / a.cells.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use airnet_core::geo::BoundingBox;
    use airnet_core::pollutant::Pollutant;
    use airnet_core::Bbox;

    fn region() -> Bbox {
        BoundingBox::square(Point { lat: 17.445, lon: 78.35 }, 2_000.0).unwrap()
    }

    fn grid_sites() -> Vec<(u16, Point)> {
        let bb = region();
        let mut out = Vec::new();
        for iy in 0..7 {
            for ix in 0..7 {
                out.push((
                    (iy * 7 + ix + 1) as u16,
                    Point {
                        lat: bb.min.lat + (iy as f64 + 0.5) / 7.0 * (bb.max.lat - bb.min.lat),
                        lon: bb.min.lon + (ix as f64 + 0.5) / 7.0 * (bb.max.lon - bb.min.lon),
                    },
                ));
            }
        }
        out
    }

    fn samples_with(values: impl Fn(&Point) -> f64) -> BTreeMap<u16, (Point, f64)> {
        grid_sites()
            .into_iter()
            .map(|(id, p)| (id, (p, values(&p))))
            .collect()
    }

    #[test]
    fn full_subset_reproduces_the_grid_exactly() {
        let samples = samples_with(|p| 40.0 + 1_000.0 * (p.lat - 17.44));
        let points: Vec<(Point, f64)> = samples.values().copied().collect();
        let full = idw_grid(&points, &region(), 12, 12, 2.0, 0, Pollutant::Pm10).unwrap();
        let all_ids: Vec<u16> = samples.keys().copied().collect();
        let (sparse, rmse) = sparse_subset_rmse(&full, &samples, &all_ids, 2.0).unwrap();
        assert_eq!(sparse.cells, full.cells);
        assert_eq!(rmse, 0.0);
    }

    #[test]
    fn uniform_field_has_near_zero_rmse_for_any_subset() {
        let samples = samples_with(|_| 55.5);
        let points: Vec<(Point, f64)> = samples.values().copied().collect();
        let full = idw_grid(&points, &region(), 12, 12, 2.0, 0, Pollutant::Pm10).unwrap();
        let subset = spread_subset(&grid_sites(), 4, 3);
        let (_, rmse) = sparse_subset_rmse(&full, &samples, &subset, 2.0).unwrap();
        assert!(rmse < 1e-9, "rmse {rmse}");
    }

    #[test]
    fn empty_subset_and_unknown_devices_error() {
        let samples = samples_with(|_| 1.0);
        let points: Vec<(Point, f64)> = samples.values().copied().collect();
        let full = idw_grid(&points, &region(), 4, 4, 2.0, 0, Pollutant::Pm10).unwrap();
        assert_eq!(
            sparse_subset_rmse(&full, &samples, &[], 2.0),
            Err(AnalyticsError::EmptySubset)
        );
        assert_eq!(
            sparse_subset_rmse(&full, &samples, &[200], 2.0),
            Err(AnalyticsError::UnknownDevice(200))
        );
    }

    #[test]
    fn spread_subsets_are_seeded_and_spread_out() {
        let sites = grid_sites();
        let a = spread_subset(&sites, 4, 1);
        let b = spread_subset(&sites, 4, 1);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
        // Farthest-point picks corners-ish sites: pairwise distance should
        // comfortably exceed the 285 m grid pitch.
        let by_id: BTreeMap<u16, Point> = sites.into_iter().collect();
        for (i, x) in a.iter().enumerate() {
            for y in &a[i + 1..] {
                assert!(by_id[x].haversine(&by_id[y]) > 600.0);
            }
        }
    }
}
