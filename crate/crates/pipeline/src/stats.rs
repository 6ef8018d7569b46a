//! Seasonal statistics over hourly-averaged values.

use std::collections::BTreeMap;

use airnet_core::season::{Season, SeasonCalendar};
use airnet_core::series::bucket_means;
use airnet_core::stats::mean_variance;

use crate::{month_of, TimeSeries};

/// Population mean and variance of the hourly means of each season present
/// in the series. Seasons without data are omitted.
pub fn seasonal_stats(
    series: &TimeSeries,
    calendar: &SeasonCalendar,
) -> BTreeMap<Season, (f64, f64)> {
    let hourly = bucket_means(&series.points, 3_600);
    let mut by_season: BTreeMap<Season, Vec<f64>> = BTreeMap::new();
    for (t, v) in hourly {
        by_season
            .entry(calendar.season_for_month(month_of(t)))
            .or_default()
            .push(v);
    }
    by_season
        .into_iter()
        .map(|(season, values)| {
            let (mean, var) = mean_variance(&values).expect("non-empty by construction");
            (season, (mean, var))
        })
        .collect()
}
