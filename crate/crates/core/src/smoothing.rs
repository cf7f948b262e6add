//! Trimmed moving average (TMA) across days: for each minute, average the
//! `2N + 1` days centred on `d` after dropping the `L` days with the lowest
//! daily aggregate irradiance.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DailySeries, Sample, YEAR_DAYS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmaConfig {
    /// Half-window `N` in days.
    pub half_window: usize,
    /// Number `L` of lowest-aggregate days excluded.
    pub trimmed: usize,
}

impl Default for TmaConfig {
    fn default() -> Self {
        Self { half_window: 5, trimmed: 4 }
    }
}

impl TmaConfig {
    pub fn new(half_window: usize, trimmed: usize) -> Result<Self> {
        let cfg = Self { half_window, trimmed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trimmed >= 2 * self.half_window + 1 {
            return Err(Error::InvalidInput(format!(
                "TMA trims L = {} of only {} window days",
                self.trimmed,
                2 * self.half_window + 1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedDay {
    pub day: u32,
    pub cadence_min: u32,
    /// Smoothed irradiance on the grid `0, cadence, …, 1440 − cadence`.
    pub values: Vec<f64>,
    /// Days actually averaged (`2N + 1 − L` for a complete window).
    pub days_used: usize,
    pub trimmed: usize,
    /// True when the window was shrunk at a dataset boundary.
    pub truncated: bool,
}

impl SmoothedDay {
    pub fn minutes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(|i| (i as u32 * self.cadence_min) as f64)
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.minutes().zip(self.values.iter().copied()).collect()
    }

    pub fn to_series(&self) -> DailySeries {
        DailySeries {
            day: self.day,
            samples: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &e)| Sample { minute: i as u32 * self.cadence_min, irradiance: e })
                .collect(),
        }
    }
}

/// Reusable smoothing context over one dataset: the days are resampled once
/// onto a common minute grid.
pub struct Smoother {
    cfg: TmaConfig,
    cadence_min: u32,
    grids: BTreeMap<u32, (Vec<f64>, f64)>,
    first: u32,
    last: u32,
}

impl Smoother {
    pub fn new(dataset: &[DailySeries], cfg: TmaConfig, cadence_min: u32) -> Result<Self> {
        cfg.validate()?;
        if cadence_min == 0 {
            return Err(Error::InvalidInput("zero cadence".into()));
        }
        let grids: BTreeMap<u32, (Vec<f64>, f64)> = dataset
            .iter()
            .filter(|d| !d.samples.is_empty())
            .map(|d| {
                let g = d.resample(cadence_min);
                let sum = g.iter().sum();
                (d.day, (g, sum))
            })
            .collect();
        let (Some(&first), Some(&last)) = (grids.keys().next(), grids.keys().next_back()) else {
            return Err(Error::EmptyDataset);
        };
        Ok(Self { cfg, cadence_min, grids, first, last })
    }

    /// Number of days spanned by the dataset, first to last inclusive.
    pub fn span(&self) -> u32 {
        self.last - self.first + 1
    }

    /// Whether windows wrap around the dataset ends (full-year datasets).
    pub fn wraps(&self) -> bool {
        self.span() >= YEAR_DAYS
    }

    pub fn days(&self) -> impl Iterator<Item = u32> + '_ {
        self.grids.keys().copied()
    }

    pub fn smooth(&self, day: u32) -> Result<SmoothedDay> {
        let n = self.cfg.half_window as i64;
        let d = day as i64;
        let (first, last) = (self.first as i64, self.last as i64);
        let span = self.span() as i64;

        let (window_days, truncated): (Vec<i64>, bool) = if self.wraps() {
            let days = (-n..=n).map(|k| first + (d - first + k).rem_euclid(span)).collect();
            (days, false)
        } else {
            if d < first || d > last {
                return Err(Error::InsufficientData(format!(
                    "day {day} outside dataset [{first}, {last}]"
                )));
            }
            let n_eff = n.min(d - first).min(last - d);
            ((d - n_eff..=d + n_eff).collect(), n_eff < n)
        };
        let window = window_days.len();
        let trimmed = if truncated { self.cfg.trimmed.min(window - 1) } else { self.cfg.trimmed };

        let mut present: Vec<&(Vec<f64>, f64)> = window_days
            .iter()
            .filter_map(|&k| self.grids.get(&(k as u32)))
            .collect();
        if present.len() < trimmed + 1 {
            return Err(Error::InsufficientData(format!(
                "day {day}: {} usable window days for L = {trimmed}",
                present.len()
            )));
        }
        // stable: ties keep chronological order
        present.sort_by(|a, b| a.1.total_cmp(&b.1));
        let kept = &present[trimmed..];
        let denom = kept.len() as f64;
        let len = kept[0].0.len();
        let values = (0..len)
            .map(|i| (kept.iter().map(|g| g.0[i]).sum::<f64>() / denom).max(0.0))
            .collect();
        Ok(SmoothedDay {
            day,
            cadence_min: self.cadence_min,
            values,
            days_used: kept.len(),
            trimmed,
            truncated,
        })
    }
}

pub fn trimmed_moving_average(
    dataset: &[DailySeries],
    day: u32,
    cfg: TmaConfig,
    cadence_min: u32,
) -> Result<SmoothedDay> {
    Smoother::new(dataset, cfg, cadence_min)?.smooth(day)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn flat_day(day: u32, value: f64) -> DailySeries {
        DailySeries {
            day,
            samples: (0..1440)
                .step_by(10)
                .map(|m| Sample { minute: m, irradiance: value })
                .collect(),
        }
    }

    fn shaped_day(day: u32, f: impl Fn(u32) -> f64) -> DailySeries {
        DailySeries {
            day,
            samples: (0..1440).step_by(10).map(|m| Sample { minute: m, irradiance: f(m) }).collect(),
        }
    }

    #[test]
    fn identical_days_preserved() {
        let ds: Vec<_> = (0..11).map(|d| flat_day(d, 7.5)).collect();
        for l in 0..11 {
            let s = trimmed_moving_average(&ds, 5, TmaConfig::new(5, l).unwrap(), 10).unwrap();
            assert!(s.values.iter().all(|&v| (v - 7.5).abs() < 1e-12));
        }
    }

    #[test]
    fn identity_window() {
        let ds: Vec<_> = (0..3)
            .map(|d| shaped_day(d, |m| (m as f64 * 0.37 + d as f64).sin().abs() * 100.0))
            .collect();
        let s = trimmed_moving_average(&ds, 1, TmaConfig::new(0, 0).unwrap(), 10).unwrap();
        assert_eq!(s.values, ds[1].resample(10));
        assert_eq!(s.days_used, 1);
    }

    #[test]
    fn lowest_aggregate_day_excluded() {
        // daily sums 10, 100, 100 spread over 144 slots
        let ds = vec![
            flat_day(0, 10.0 / 144.0),
            flat_day(1, 100.0 / 144.0),
            shaped_day(2, |m| if m < 720 { 50.0 / 72.0 * 1.5 } else { 50.0 / 72.0 * 0.5 }),
        ];
        let s = trimmed_moving_average(&ds, 1, TmaConfig::new(1, 1).unwrap(), 10).unwrap();
        assert_eq!(s.days_used, 2);
        for (i, v) in s.values.iter().enumerate() {
            let expected = (ds[1].samples[i].irradiance + ds[2].samples[i].irradiance) / 2.0;
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn short_dataset_truncates_window() {
        let ds: Vec<_> = (0..30).map(|d| flat_day(d, d as f64)).collect();
        let sm = Smoother::new(&ds, TmaConfig::default(), 10).unwrap();
        assert!(!sm.wraps());
        let edge = sm.smooth(0).unwrap();
        assert!(edge.truncated);
        assert_eq!(edge.days_used, 1);
        let d2 = sm.smooth(2).unwrap();
        // window {0..4}, L capped at 4 → highest day only
        assert_eq!(d2.days_used, 1);
        assert_eq!(d2.values[0], 4.0);
        let mid = sm.smooth(15).unwrap();
        assert!(!mid.truncated);
        assert_eq!(mid.days_used, 7);
        assert!((mid.values[0] - (14.0 + 15.0 + 16.0 + 17.0 + 18.0 + 19.0 + 20.0) / 7.0).abs() < 1e-12);
    }

    #[test]
    fn full_year_wraps() {
        let ds: Vec<_> = (0..365).map(|d| flat_day(d, if d == 363 { 1000.0 } else { 1.0 })).collect();
        let sm = Smoother::new(&ds, TmaConfig::new(5, 0).unwrap(), 10).unwrap();
        assert!(sm.wraps());
        let s = sm.smooth(2).unwrap();
        assert_eq!(s.days_used, 11);
        assert!((s.values[0] - (10.0 + 1000.0) / 11.0).abs() < 1e-12);
    }

    #[test]
    fn missing_days_error() {
        let ds: Vec<_> = (0..365).filter(|d| !(95..106).contains(d)).map(|d| flat_day(d, 1.0)).collect();
        let sm = Smoother::new(&ds, TmaConfig::default(), 10).unwrap();
        assert!(matches!(sm.smooth(100), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn invalid_config() {
        assert!(TmaConfig::new(1, 3).is_err());
        assert!(TmaConfig::new(1, 2).is_ok());
    }

    proptest! {
        // Pointwise-ordered family: day k has curve k·base(m). Excluding more of the
        // lowest days can only raise the average.
        #[test]
        fn exclusion_monotone(scales in proptest::collection::vec(0.1f64..10.0, 7)) {
            let ds: Vec<_> = scales
                .iter()
                .enumerate()
                .map(|(d, &k)| shaped_day(d as u32, move |m| k * (1.0 + (m as f64 / 200.0).sin().abs())))
                .collect();
            let mut prev: Option<Vec<f64>> = None;
            for l in 0..7 {
                let s = trimmed_moving_average(&ds, 3, TmaConfig::new(3, l).unwrap(), 10).unwrap();
                if let Some(p) = &prev {
                    for (a, b) in p.iter().zip(&s.values) {
                        prop_assert!(*b >= *a - 1e-9);
                    }
                }
                prev = Some(s.values);
            }
        }

        #[test]
        fn convex_combination(vals in proptest::collection::vec(0.0f64..1000.0, 5), l in 0usize..5) {
            let ds: Vec<_> = vals
                .iter()
                .enumerate()
                .map(|(d, &v)| shaped_day(d as u32, move |m| v * (m as f64 / 1440.0)))
                .collect();
            let s = trimmed_moving_average(&ds, 2, TmaConfig::new(2, l).unwrap(), 10).unwrap();
            prop_assert_eq!(s.days_used, 5 - l);
            for (i, v) in s.values.iter().enumerate() {
                let col: Vec<f64> = ds.iter().map(|d| d.samples[i].irradiance).collect();
                let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(*v >= lo - 1e-9 && *v <= hi + 1e-9);
            }
        }
    }
}
