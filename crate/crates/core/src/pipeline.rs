//! End-to-end fitting and replicate-conversion drivers. Errors carry the
//! stage that produced them.

use std::fmt;

use log::{info, warn};

use crate::daily_fit::{fit_parabola, normalize, residuals, FitParams, ResidualSample};
use crate::error::Error;
use crate::ingest::{day_of_cycle, Dataset, DailySeries, SeasonTable};
use crate::model::{ModelFile, Provenance};
use crate::pv::{charge_statistics, daily_charge_tabulated, ChargeStatistics, CurrentTable};
use crate::residual_maps::{build_grid, build_maps, DayResiduals};
use crate::sim::{replicate_rng, Simulator};
use crate::smoothing::{Smoother, TmaConfig};
use crate::stats;
use crate::trends::{fit_gumbel, fit_trend, residual_histogram, HistogramBin, ParamTrend, TrendModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Smoothing,
    Fit,
    Trends,
    Maps,
    Model,
    Simulation,
    Pv,
    Validation,
    Plot,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Ingest => "ingest",
            Stage::Smoothing => "smoothing",
            Stage::Fit => "daily fit",
            Stage::Trends => "trends",
            Stage::Maps => "residual maps",
            Stage::Model => "model file",
            Stage::Simulation => "simulation",
            Stage::Pv => "pv",
            Stage::Validation => "validation",
            Stage::Plot => "plot",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, StageError>;
}

impl<T> AtStage<T> for crate::Result<T> {
    fn at(self, stage: Stage) -> Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub m_c: f64,
    pub tma: TmaConfig,
    pub cadence_min: u32,
    pub seasons: SeasonTable,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            m_c: crate::daily_fit::DEFAULT_M_C,
            tma: TmaConfig::default(),
            cadence_min: 10,
            seasons: SeasonTable::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOutput {
    pub model: ModelFile,
    pub params: Vec<FitParams>,
    /// Days dropped by smoothing or fitting, with the reason.
    pub skipped: Vec<(u32, String)>,
    /// Residual histograms of `A`, `B`, `C` about their trends.
    pub histograms: [Vec<HistogramBin>; 3],
    /// Whether the smoothing windows were truncated at the dataset ends.
    pub truncated_windows: bool,
}

fn fit_param(points: &[(f64, f64)]) -> crate::Result<(ParamTrend, Vec<HistogramBin>)> {
    let trend = fit_trend(points)?;
    let xs: Vec<f64> = points.iter().map(|&(d, y)| y - trend.eval(d)).collect();
    let residual = fit_gumbel(&xs)?;
    let hist = residual_histogram(&xs, &residual)?;
    Ok((ParamTrend { trend, residual }, hist))
}

/// Fits a complete model: smoothing, daily parabolas, annual trends with
/// Gumbel residuals, and seasonal residual maps.
pub fn fit_model(dataset: &Dataset, cfg: &FitConfig) -> Result<FitOutput, StageError> {
    if dataset.days.is_empty() {
        return Err(StageError { stage: Stage::Ingest, source: Error::EmptyDataset });
    }
    let smoother = Smoother::new(&dataset.days, cfg.tma, cfg.cadence_min).at(Stage::Smoothing)?;
    if !smoother.wraps() {
        warn!("dataset spans {} days; smoothing windows are truncated at its ends", smoother.span());
    }
    let mut skipped = Vec::new();
    let mut params = Vec::new();
    let mut truncated_windows = false;
    let mut smoothing_failures = 0;
    for day in &dataset.days {
        let smoothed = match smoother.smooth(day.day) {
            Ok(s) => s,
            Err(e) => {
                warn!("day {}: smoothing skipped: {e}", day.day);
                smoothing_failures += 1;
                skipped.push((day.day, e.to_string()));
                continue;
            }
        };
        truncated_windows |= smoothed.truncated;
        match fit_parabola(day.day, &smoothed.points(), cfg.m_c) {
            Ok(p) => params.push(p),
            Err(e) => {
                warn!("day {}: fit rejected: {e}", day.day);
                skipped.push((day.day, e.to_string()));
            }
        }
    }
    if smoothing_failures == dataset.days.len() {
        return Err(StageError {
            stage: Stage::Smoothing,
            source: Error::InsufficientData("no day could be smoothed".into()),
        });
    }
    if params.len() < 10 {
        return Err(StageError {
            stage: Stage::Fit,
            source: Error::InsufficientData(format!("{} days fitted, need 10", params.len())),
        });
    }
    info!("fitted {} days, skipped {}", params.len(), skipped.len());

    let series = |f: fn(&FitParams) -> f64| -> Vec<(f64, f64)> {
        params.iter().map(|p| (day_of_cycle(p.day) as f64, f(p))).collect()
    };
    let (a, ha) = fit_param(&series(|p| p.a)).at(Stage::Trends)?;
    let (b, hb) = fit_param(&series(|p| p.b)).at(Stage::Trends)?;
    let (c, hc) = fit_param(&series(|p| p.c)).at(Stage::Trends)?;
    let mean_b = stats::mean(&params.iter().map(|p| p.b).collect::<Vec<_>>());
    let trends = TrendModel { a, b, c, mean_b };

    let grid = build_grid(mean_b, cfg.m_c).at(Stage::Maps)?;
    let raw: std::collections::HashMap<u32, &DailySeries> = dataset.days.iter().map(|d| (d.day, d)).collect();
    let day_res: Vec<(u32, Vec<ResidualSample>)> = params
        .iter()
        .map(|p| (p.day, residuals(&normalize(raw[&p.day], p, cfg.m_c))))
        .collect();
    let inputs: Vec<DayResiduals<'_>> = day_res
        .iter()
        .map(|(day, r)| DayResiduals { day: *day, season: cfg.seasons.season_of(*day), residuals: r })
        .collect();
    let maps = build_maps(&inputs, &grid, &cfg.seasons.ids()).at(Stage::Maps)?;

    let provenance = Provenance {
        source: "fit".into(),
        days_fitted: params.len(),
        days_rejected: skipped.len(),
        ..Default::default()
    };
    let model = ModelFile::new(cfg.m_c, cfg.seasons.clone(), trends, maps, provenance).at(Stage::Model)?;
    Ok(FitOutput { model, params, skipped, histograms: [ha, hb, hc], truncated_windows })
}

/// Simulated days `days` at `cadence_min`, replicate 0 of `seed`, as a dataset.
pub fn synthetic_dataset(sim: &Simulator<'_>, days: &[u32], cadence_min: u32, seed: u64) -> crate::Result<Vec<DailySeries>> {
    days.iter()
        .map(|&d| {
            let day = sim.simulate_irradiance(&mut replicate_rng(seed, d, 0), d, cadence_min)?;
            Ok(DailySeries {
                day: d,
                samples: day
                    .curve
                    .iter()
                    .filter(|(m, _)| *m < crate::ingest::MINUTES_PER_DAY as f64)
                    .map(|&(m, e)| crate::ingest::Sample { minute: m as u32, irradiance: e })
                    .collect(),
            })
        })
        .collect()
}

/// Charges of `replicates` simulated days for each day in `days`.
pub fn replicate_charges(
    sim: &Simulator<'_>,
    table: &CurrentTable,
    days: &[u32],
    replicates: u32,
    cadence_min: u32,
    seed: u64,
) -> crate::Result<Vec<(u32, Vec<f64>)>> {
    days.iter()
        .map(|&d| {
            let qs = (0..replicates)
                .map(|r| {
                    let day = sim.simulate_irradiance(&mut replicate_rng(seed, d, r), d, cadence_min)?;
                    Ok(daily_charge_tabulated(&day.curve, table))
                })
                .collect::<crate::Result<Vec<f64>>>()?;
            Ok((d, qs))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DayComparison {
    pub stats: ChargeStatistics,
    pub measured: f64,
    pub in_box: bool,
}

/// Per-day statistics of simulated charges against one measured charge per day.
pub fn compare_charges(
    simulated: &[(u32, Vec<f64>)],
    measured: &[(u32, f64)],
) -> crate::Result<Vec<DayComparison>> {
    let sim_days: Vec<u32> = simulated.iter().map(|s| s.0).collect();
    let meas_days: Vec<u32> = measured.iter().map(|m| m.0).collect();
    if sim_days != meas_days {
        return Err(Error::InvalidInput(format!(
            "day ranges differ: {} simulated days, {} measured days",
            sim_days.len(),
            meas_days.len()
        )));
    }
    simulated
        .iter()
        .zip(measured)
        .map(|((day, qs), &(_, q))| {
            let stats = charge_statistics(*day, qs)?;
            Ok(DayComparison { in_box: stats.in_box(q), stats, measured: q })
        })
        .collect()
}

pub fn within_box_rate(rows: &[DayComparison]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    rows.iter().filter(|r| r.in_box).count() as f64 / rows.len() as f64
}

pub fn write_comparison_csv<W: std::io::Write>(out: W, rows: &[DayComparison]) -> crate::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "measured_ah", "q1", "median", "q3", "in_box"])?;
    for r in rows {
        w.write_record([
            r.stats.day.to_string(),
            format!("{:.6}", r.measured),
            format!("{:.6}", r.stats.q1),
            format!("{:.6}", r.stats.median),
            format!("{:.6}", r.stats.q3),
            (r.in_box as u8).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pv::{ArraySpec, PvArray};

    #[test]
    fn empty_dataset_is_an_ingest_failure() {
        let err = fit_model(&Dataset::default(), &FitConfig::default()).unwrap_err();
        assert_eq!(err.stage, Stage::Ingest);
    }

    #[test]
    fn short_dataset_fits_with_truncated_windows() {
        let m = ModelFile::reference();
        let sim = Simulator::new(&m).unwrap();
        let days: Vec<u32> = (100..130).collect();
        let ds = Dataset { days: synthetic_dataset(&sim, &days, 10, 1).unwrap(), ..Default::default() };
        let out = fit_model(&ds, &FitConfig::default()).unwrap();
        assert!(out.truncated_windows);
        assert_eq!(out.params.len(), 30);
        assert_eq!(out.model.grid().j, build_grid(out.model.trends.mean_b, 360.0).unwrap().j);
    }

    #[test]
    fn comparison_by_construction() {
        let sim: Vec<(u32, Vec<f64>)> = (0..5).map(|d| (d, vec![1.0, 2.0, 3.0, 4.0, 5.0])).collect();
        let medians: Vec<(u32, f64)> = (0..5).map(|d| (d, 3.0)).collect();
        assert_eq!(within_box_rate(&compare_charges(&sim, &medians).unwrap()), 1.0);
        let far: Vec<(u32, f64)> = (0..5).map(|d| (d, 100.0)).collect();
        assert_eq!(within_box_rate(&compare_charges(&sim, &far).unwrap()), 0.0);
        assert!(compare_charges(&sim, &far[1..]).is_err());
    }

    #[test]
    fn replicate_charges_deterministic() {
        let m = ModelFile::reference();
        let sim = Simulator::new(&m).unwrap();
        let table = PvArray::new(ArraySpec::default()).unwrap().current_table(1600.0, 2.0).unwrap();
        let a = replicate_charges(&sim, &table, &[10, 11], 5, 10, 3).unwrap();
        let b = replicate_charges(&sim, &table, &[10, 11], 5, 10, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|(_, qs)| qs.iter().all(|q| *q > 10.0 && *q < 80.0)));
    }
}
