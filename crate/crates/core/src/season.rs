//! Season labels and the month-to-season calendar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CalendarError {
    #[error("month {0} is not in 1..=12")]
    BadMonth(u32),
    #[error("month {0} mapped to more than one season")]
    DuplicateMonth(u32),
    #[error("month {0} is not mapped to any season")]
    UnmappedMonth(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    Monsoon,
    Winter,
    Summer,
}

impl Season {
    pub const ALL: [Season; 3] = [Season::Monsoon, Season::Winter, Season::Summer];

    pub fn name(&self) -> &'static str {
        match self {
            Season::Monsoon => "monsoon",
            Season::Winter => "winter",
            Season::Summer => "summer",
        }
    }
}

impl std::fmt::Display for Season {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Season {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "monsoon" => Ok(Season::Monsoon),
            "winter" => Ok(Season::Winter),
            "summer" => Ok(Season::Summer),
            other => Err(format!("unknown season {other:?}")),
        }
    }
}

/// One value per season; used for baselines and weather means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerSeason<T> {
    pub monsoon: T,
    pub winter: T,
    pub summer: T,
}

impl<T: Copy> PerSeason<T> {
    pub fn uniform(v: T) -> Self {
        Self {
            monsoon: v,
            winter: v,
            summer: v,
        }
    }

    pub fn get(&self, season: Season) -> T {
        match season {
            Season::Monsoon => self.monsoon,
            Season::Winter => self.winter,
            Season::Summer => self.summer,
        }
    }
}

/// Total mapping from calendar month (1..=12) to season.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeasonCalendar {
    by_month: [Season; 12],
}

impl SeasonCalendar {
    /// Builds a calendar from the month lists of each season; every month
    /// must appear exactly once.
    pub fn new(monsoon: &[u32], winter: &[u32], summer: &[u32]) -> Result<Self, CalendarError> {
        let mut by_month = [None::<Season>; 12];
        for (season, months) in [
            (Season::Monsoon, monsoon),
            (Season::Winter, winter),
            (Season::Summer, summer),
        ] {
            for &m in months {
                if !(1..=12).contains(&m) {
                    return Err(CalendarError::BadMonth(m));
                }
                let slot = &mut by_month[(m - 1) as usize];
                if slot.is_some() {
                    return Err(CalendarError::DuplicateMonth(m));
                }
                *slot = Some(season);
            }
        }
        let mut filled = [Season::Monsoon; 12];
        for (i, s) in by_month.iter().enumerate() {
            filled[i] = s.ok_or(CalendarError::UnmappedMonth(i as u32 + 1))?;
        }
        Ok(Self { by_month: filled })
    }

    /// `month` in 1..=12.
    pub fn season_for_month(&self, month: u32) -> Season {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        self.by_month[(month - 1) as usize]
    }
}

impl Default for SeasonCalendar {
    /// Monsoon Jun-Oct, winter Nov-Feb, summer Mar-May.
    fn default() -> Self {
        Self::new(&[6, 7, 8, 9, 10], &[11, 12, 1, 2], &[3, 4, 5]).unwrap()
    }
}
