//! Raw GHI ingestion: time decomposition, season lookup and CSV parsing with
//! row-level validation and gap detection.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MINUTES_PER_DAY: u32 = 1440;
/// Period used for every season and trend evaluation; leap days wrap to day 0.
pub const YEAR_DAYS: u32 = 365;

/// Splits absolute minutes since the reference midnight into `(day, minute_of_day)`.
pub fn decompose_time(t: i64) -> Result<(u32, u32)> {
    if t < 0 {
        return Err(Error::InvalidInput(format!("negative time {t} min")));
    }
    let day = t / MINUTES_PER_DAY as i64;
    let minute = t % MINUTES_PER_DAY as i64;
    let day = u32::try_from(day)
        .map_err(|_| Error::InvalidInput(format!("time {t} min overflows the day index")))?;
    Ok((day, minute as u32))
}

/// Day index reduced onto the 365-day cycle.
pub fn day_of_cycle(day: u32) -> u32 {
    day % YEAR_DAYS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub minute: u32,
    pub irradiance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    pub day: u32,
    /// Strictly increasing in `minute`.
    pub samples: Vec<Sample>,
}

impl DailySeries {
    pub fn daily_sum(&self) -> f64 {
        self.samples.iter().map(|s| s.irradiance).sum()
    }

    /// Linear interpolation of the day's curve at an arbitrary minute. Values
    /// outside the observed span take the nearest endpoint.
    pub fn interpolate(&self, minute: f64) -> f64 {
        let s = &self.samples;
        match s.len() {
            0 => 0.0,
            1 => s[0].irradiance,
            _ => {
                if minute <= s[0].minute as f64 {
                    return s[0].irradiance;
                }
                let last = s[s.len() - 1];
                if minute >= last.minute as f64 {
                    return last.irradiance;
                }
                let k = s.partition_point(|x| (x.minute as f64) <= minute);
                let (a, b) = (s[k - 1], s[k]);
                let w = (minute - a.minute as f64) / (b.minute - a.minute) as f64;
                a.irradiance + w * (b.irradiance - a.irradiance)
            }
        }
    }

    /// Resamples onto the uniform grid `0, cadence, …, 1440 − cadence`.
    pub fn resample(&self, cadence_min: u32) -> Vec<f64> {
        (0..MINUTES_PER_DAY)
            .step_by(cadence_min as usize)
            .map(|m| self.interpolate(m as f64))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Season {
    pub id: u8,
    pub from_day: u32,
    /// Inclusive; may be smaller than `from_day` when the season wraps past day 364.
    pub to_day: u32,
}

impl Season {
    pub fn contains(&self, day: u32) -> bool {
        let d = day_of_cycle(day);
        if self.from_day <= self.to_day {
            (self.from_day..=self.to_day).contains(&d)
        } else {
            d >= self.from_day || d <= self.to_day
        }
    }

    fn len(&self) -> u32 {
        if self.from_day <= self.to_day {
            self.to_day - self.from_day + 1
        } else {
            YEAR_DAYS - self.from_day + self.to_day + 1
        }
    }
}

/// Four seasons partitioning the 365-day cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Season>", into = "Vec<Season>")]
pub struct SeasonTable {
    seasons: Vec<Season>,
}

impl Default for SeasonTable {
    /// Solstice/equinox-centred seasons of the 2017–2018 campaign.
    fn default() -> Self {
        Self {
            seasons: vec![
                Season { id: 1, from_day: 35, to_day: 124 },
                Season { id: 2, from_day: 125, to_day: 218 },
                Season { id: 3, from_day: 219, to_day: 309 },
                Season { id: 4, from_day: 310, to_day: 34 },
            ],
        }
    }
}

impl SeasonTable {
    pub fn new(seasons: Vec<Season>) -> Result<Self> {
        if seasons.is_empty() {
            return Err(Error::InvalidInput("season table is empty".into()));
        }
        for s in &seasons {
            if s.from_day >= YEAR_DAYS || s.to_day >= YEAR_DAYS {
                return Err(Error::InvalidInput(format!(
                    "season {} bounds must lie in [0, {YEAR_DAYS})",
                    s.id
                )));
            }
        }
        let total: u32 = seasons.iter().map(Season::len).sum();
        let covered_once = (0..YEAR_DAYS)
            .all(|d| seasons.iter().filter(|s| s.contains(d)).count() == 1);
        if total != YEAR_DAYS || !covered_once {
            return Err(Error::InvalidInput(
                "seasons must partition the 365-day cycle without overlap".into(),
            ));
        }
        let mut ids: Vec<u8> = seasons.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != seasons.len() {
            return Err(Error::InvalidInput("duplicate season ids".into()));
        }
        Ok(Self { seasons })
    }

    pub fn seasons(&self) -> &[Season] {
        &self.seasons
    }

    pub fn ids(&self) -> Vec<u8> {
        self.seasons.iter().map(|s| s.id).collect()
    }

    /// Season id containing `day` (taken modulo 365).
    pub fn season_of(&self, day: u32) -> u8 {
        self.seasons
            .iter()
            .find(|s| s.contains(day))
            .map(|s| s.id)
            .expect("season table is a validated partition")
    }
}

impl TryFrom<Vec<Season>> for SeasonTable {
    type Error = Error;

    fn try_from(v: Vec<Season>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<SeasonTable> for Vec<Season> {
    fn from(t: SeasonTable) -> Self {
        t.seasons
    }
}

pub fn season_of(day: u32, seasons: &SeasonTable) -> u8 {
    seasons.season_of(day)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IngestConfig {
    /// Nominal sampling cadence in minutes.
    pub cadence_min: u32,
    /// Added to every decomposed day index (calendar alignment).
    pub day_offset: u32,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self { cadence_min: 10, day_offset: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Schema {
    Absolute,
    Decomposed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowRejection {
    /// 1-based line number in the source, header included.
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub day: u32,
    pub first_missing_minute: u32,
    pub last_missing_minute: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    /// One entry per day present, ordered by day index.
    pub days: Vec<DailySeries>,
    pub rejected: Vec<RowRejection>,
    pub gaps: Vec<Gap>,
}

impl Dataset {
    pub fn sample_count(&self) -> usize {
        self.days.iter().map(|d| d.samples.len()).sum()
    }
}

fn detect_schema(header: &csv::StringRecord) -> Result<Schema> {
    let cols: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    match refs.as_slice() {
        ["t_min", "irradiance_wm2"] => Ok(Schema::Absolute),
        ["day", "minute", "irradiance_wm2"] => Ok(Schema::Decomposed),
        _ => Err(Error::HeaderMismatch { found: cols }),
    }
}

fn parse_row(rec: &csv::StringRecord, schema: Schema) -> std::result::Result<(u32, u32, f64), String> {
    let field = |i: usize| rec.get(i).map(str::trim).ok_or_else(|| "missing field".to_string());
    let (day, minute, e_idx) = match schema {
        Schema::Absolute => {
            let raw = field(0)?;
            let t: i64 = raw.parse().map_err(|_| format!("malformed timestamp {raw:?}"))?;
            let (d, m) = decompose_time(t).map_err(|e| e.to_string())?;
            (d, m, 1)
        }
        Schema::Decomposed => {
            let rd = field(0)?;
            let rm = field(1)?;
            let d: i64 = rd.parse().map_err(|_| format!("malformed day {rd:?}"))?;
            let m: i64 = rm.parse().map_err(|_| format!("malformed minute {rm:?}"))?;
            if d < 0 {
                return Err(format!("negative day {d}"));
            }
            if !(0..MINUTES_PER_DAY as i64).contains(&m) {
                return Err(format!("minute {m} outside [0, 1440)"));
            }
            let d = u32::try_from(d).map_err(|_| format!("day {d} out of range"))?;
            (d, m as u32, 2)
        }
    };
    let expected = e_idx + 1;
    if rec.len() != expected {
        return Err(format!("expected {expected} fields, found {}", rec.len()));
    }
    let re = field(e_idx)?;
    let e: f64 = re.parse().map_err(|_| format!("malformed irradiance {re:?}"))?;
    if !e.is_finite() {
        return Err(format!("non-finite irradiance {re:?}"));
    }
    if e < 0.0 {
        return Err(format!("negative irradiance {e}"));
    }
    Ok((day, minute, e))
}

fn day_gaps(series: &DailySeries, cadence: u32) -> Vec<Gap> {
    let mut gaps = Vec::new();
    let s = &series.samples;
    let (Some(first), Some(last)) = (s.first(), s.last()) else {
        return gaps;
    };
    let push = |gaps: &mut Vec<Gap>, a: u32, b: u32| {
        gaps.push(Gap { day: series.day, first_missing_minute: a, last_missing_minute: b })
    };
    if first.minute >= cadence {
        push(&mut gaps, 0, first.minute - 1);
    }
    let limit = cadence as f64 * 1.5;
    for w in s.windows(2) {
        if (w[1].minute - w[0].minute) as f64 > limit {
            push(&mut gaps, w[0].minute + 1, w[1].minute - 1);
        }
    }
    if MINUTES_PER_DAY - last.minute > cadence {
        push(&mut gaps, last.minute + 1, MINUTES_PER_DAY - 1);
    }
    gaps
}

/// Parses a GHI CSV in either the absolute (`t_min,irradiance_wm2`) or the
/// decomposed (`day,minute,irradiance_wm2`) schema, detected from the header.
///
/// Invalid rows are recorded in [`Dataset::rejected`] and skipped. Duplicate
/// minutes within a day keep the first occurrence.
pub fn parse_dataset<R: Read>(source: R, cfg: &IngestConfig) -> Result<Dataset> {
    if cfg.cadence_min == 0 || cfg.cadence_min > MINUTES_PER_DAY {
        return Err(Error::InvalidInput(format!("cadence {} min", cfg.cadence_min)));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let schema = detect_schema(rdr.headers()?)?;

    let mut by_day: BTreeMap<u32, Vec<Sample>> = BTreeMap::new();
    let mut rejected = Vec::new();
    let mut seen: std::collections::HashSet<(u32, u32)> = Default::default();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map(|p| p.line()).unwrap_or(0);
                if matches!(e.kind(), csv::ErrorKind::Io(_)) {
                    return Err(e.into());
                }
                rejected.push(RowRejection { line, reason: e.to_string() });
                continue;
            }
        };
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        match parse_row(&rec, schema) {
            Ok((d, m, e)) => {
                let day = d + cfg.day_offset;
                if !seen.insert((day, m)) {
                    rejected.push(RowRejection { line, reason: format!("duplicate minute {m} on day {day}") });
                    continue;
                }
                by_day.entry(day).or_default().push(Sample { minute: m, irradiance: e });
            }
            Err(reason) => rejected.push(RowRejection { line, reason }),
        }
    }
    if by_day.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut days = Vec::with_capacity(by_day.len());
    let mut gaps = Vec::new();
    for (day, mut samples) in by_day {
        samples.sort_by_key(|s| s.minute);
        let series = DailySeries { day, samples };
        gaps.extend(day_gaps(&series, cfg.cadence_min));
        days.push(series);
    }
    Ok(Dataset { days, rejected, gaps })
}

/// Writes series in the decomposed input schema.
pub fn write_series_csv<W: Write>(out: W, days: &[DailySeries]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "minute", "irradiance_wm2"])?;
    for d in days {
        for s in &d.samples {
            w.write_record([d.day.to_string(), s.minute.to_string(), s.irradiance.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_gap_report<W: Write>(out: W, gaps: &[Gap]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "first_missing_minute", "last_missing_minute"])?;
    for g in gaps {
        w.write_record([
            g.day.to_string(),
            g.first_missing_minute.to_string(),
            g.last_missing_minute.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
