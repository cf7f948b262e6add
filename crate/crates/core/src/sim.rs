//! Forward model. A simulated day draws `(A, B, C) = trend + Gumbel noise`, a
//! residual path `R*ⱼ = R*ⱼ₋₁ + (2/J)·r*ⱼ` with rates sampled from the
//! season's KDE columns, and de-normalizes
//! `E(m) = C·[1 − (m*)² + R*(m*)]` for `|m*| ≤ 1`.
//!
//! Daily radiant exposure is available through two routes: quadrature of the
//! simulated curve, and the closed form `(m_c/60)·B·C·[4/3 + ∫R*]` with the
//! residual integral taken by the trapezoid rule on the grid nodes.

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::daily_fit::FitParams;
use crate::error::{Error, Result};
use crate::ingest::{day_of_cycle, MINUTES_PER_DAY};
use crate::model::ModelFile;
use crate::residual_maps::{column_support, ColumnDensity, MstarGrid, SUPPORT_THRESHOLD};
use crate::stats;

pub const REALIZATION_ATTEMPTS: usize = 100;
pub const RATE_RESAMPLE_ATTEMPTS: usize = 100;

/// Seed of the stream for `(day, replicate)` under `base_seed`.
pub fn replicate_seed(base_seed: u64, day: u32, replicate: u32) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(splitmix(splitmix(base_seed) ^ day as u64) ^ ((replicate as u64) << 32 | 0x5eed))
}

pub fn replicate_rng(base_seed: u64, day: u32, replicate: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(replicate_seed(base_seed, day, replicate))
}

/// Which stochastic terms are drawn; disabled terms are fixed at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stochastic {
    pub parameters: bool,
    pub residuals: bool,
}

impl Default for Stochastic {
    fn default() -> Self {
        Self { parameters: true, residuals: true }
    }
}

impl Stochastic {
    pub const NONE: Self = Self { parameters: false, residuals: false };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDay {
    pub day: u32,
    pub season: u8,
    pub params: FitParams,
    /// `(minute, irradiance)` on `0, cadence, …, 1440` inclusive.
    pub curve: Vec<(f64, f64)>,
    /// `R*ⱼ` for `j = 0..=J`.
    pub residual_path: Vec<f64>,
    /// Quadrature of `curve`, W·h/m².
    pub exposure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExposureDraw {
    pub params: FitParams,
    pub residual_path: Vec<f64>,
    pub exposure: f64,
}

struct SeasonSampler {
    season: u8,
    /// Index into `densities` used for each column (nearest non-empty).
    source: Vec<usize>,
    densities: Vec<Option<ColumnDensity>>,
    /// Allowable `R*ⱼ` interval per column.
    envelope: Vec<(f64, f64)>,
}

fn nearest_filled<T>(items: &[Option<T>], j: usize) -> Option<usize> {
    (0..items.len())
        .filter(|&k| items[k].is_some())
        .min_by_key(|&k| (k as i64 - j as i64).unsigned_abs())
}

impl SeasonSampler {
    fn new(model: &ModelFile, idx: usize) -> Result<Self> {
        let map = &model.maps.seasons[idx];
        let grid = model.grid();
        let densities: Vec<Option<ColumnDensity>> = (0..grid.len())
            .map(|j| if j == 0 { None } else { map.rates.column_density(j) })
            .collect();
        let mut source = vec![0; grid.len()];
        let mut borrowed = Vec::new();
        for (j, slot) in source.iter_mut().enumerate().skip(1) {
            *slot = nearest_filled(&densities[1..], j - 1)
                .map(|k| k + 1)
                .ok_or_else(|| Error::Model(format!("season {} has no rate samples", map.season)))?;
            if *slot != j {
                borrowed.push((j, *slot));
            }
        }
        // the edge columns are usually empty: a sample rarely falls exactly on m* = ±1
        let interior = borrowed.iter().any(|&(j, _)| j != 1 && j != grid.j);
        if interior {
            warn!("season {}: empty rate columns sampled from neighbours {borrowed:?}", map.season);
        } else if !borrowed.is_empty() {
            info!("season {}: edge rate columns sampled from neighbours {borrowed:?}", map.season);
        }
        let h = model.maps.envelope_bandwidth;
        let bounds: Vec<Option<(f64, f64)>> = map
            .residual_columns
            .iter()
            .map(|c| ColumnDensity::new(c, h).and_then(|d| column_support(&d, SUPPORT_THRESHOLD).ok()))
            .collect();
        // a node residual below -(1 - m*²) would mean negative irradiance
        let envelope = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(j, m)| {
                let (lo, hi) = nearest_filled(&bounds, j)
                    .and_then(|k| bounds[k])
                    .unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
                let floor = -(1.0 - m * m);
                (lo.max(floor), hi.max(floor))
            })
            .collect();
        Ok(Self { season: map.season, source, densities, envelope })
    }

    fn column(&self, j: usize) -> &ColumnDensity {
        self.densities[self.source[j]].as_ref().expect("source columns are filled")
    }
}

/// Immutable, shareable simulator over one model.
pub struct Simulator<'m> {
    model: &'m ModelFile,
    seasons: Vec<SeasonSampler>,
    stochastic: Stochastic,
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m ModelFile) -> Result<Self> {
        model.validate()?;
        let seasons = (0..model.maps.seasons.len())
            .map(|i| SeasonSampler::new(model, i))
            .collect::<Result<_>>()?;
        Ok(Self { model, seasons, stochastic: Stochastic::default() })
    }

    pub fn with_stochastic(mut self, stochastic: Stochastic) -> Self {
        self.stochastic = stochastic;
        self
    }

    pub fn model(&self) -> &ModelFile {
        self.model
    }

    pub fn grid(&self) -> MstarGrid {
        self.model.grid()
    }

    fn sampler(&self, day: u32) -> &SeasonSampler {
        let id = self.model.seasons.season_of(day);
        self.seasons.iter().find(|s| s.season == id).expect("validated season coverage")
    }

    pub fn season_of(&self, day: u32) -> u8 {
        self.model.seasons.season_of(day)
    }

    /// Allowable residual interval of column `j` for the season of `day`.
    pub fn envelope(&self, day: u32, j: usize) -> (f64, f64) {
        self.sampler(day).envelope[j]
    }

    /// Trend plus Gumbel draws for `A`, `B`, `C` (in that order), redrawn until
    /// the parameters describe a day with sunrise and nightfall inside it.
    pub fn realize_params<R: Rng + ?Sized>(&self, rng: &mut R, day: u32) -> Result<FitParams> {
        let t = &self.model.trends;
        let d = day_of_cycle(day) as f64;
        let (a0, b0, c0) = t.deterministic(d);
        for _ in 0..REALIZATION_ATTEMPTS {
            let p = if self.stochastic.parameters {
                FitParams {
                    day,
                    a: a0 + t.a.residual.sample(rng),
                    b: b0 + t.b.residual.sample(rng),
                    c: c0 + t.c.residual.sample(rng),
                }
            } else {
                FitParams { day, a: a0, b: b0, c: c0 }
            };
            if p.is_valid(self.model.m_c) {
                return Ok(p);
            }
            if !self.stochastic.parameters {
                break;
            }
        }
        Err(Error::Realization { day, attempts: REALIZATION_ATTEMPTS })
    }

    /// Inverse-transform draw of `r*` from column `j` of the season of `day`.
    pub fn sample_rate<R: Rng + ?Sized>(&self, rng: &mut R, day: u32, j: usize) -> f64 {
        self.sampler(day).column(j).inverse_cdf(rng.random())
    }

    /// Residual path with `R*₀ = 0`. A rate that would leave the column's
    /// allowable interval is redrawn; after the attempt cap the step is clamped.
    pub fn simulate_residual_path<R: Rng + ?Sized>(&self, rng: &mut R, day: u32) -> Vec<f64> {
        let grid = self.grid();
        let mut path = vec![0.0; grid.len()];
        if !self.stochastic.residuals {
            return path;
        }
        let s = self.sampler(day);
        let step = grid.spacing();
        for j in 1..grid.len() {
            let (lo, hi) = s.envelope[j];
            let col = s.column(j);
            let mut next = f64::NAN;
            for _ in 0..RATE_RESAMPLE_ATTEMPTS {
                next = path[j - 1] + step * col.inverse_cdf(rng.random());
                if (lo..=hi).contains(&next) {
                    break;
                }
            }
            path[j] = next.clamp(lo, hi);
        }
        path
    }

    /// Samples one day on a `cadence_min` minute grid.
    pub fn simulate_irradiance<R: Rng + ?Sized>(&self, rng: &mut R, day: u32, cadence_min: u32) -> Result<SimulatedDay> {
        if cadence_min == 0 || MINUTES_PER_DAY % cadence_min != 0 {
            return Err(Error::InvalidInput(format!("cadence {cadence_min} must divide 1440")));
        }
        let params = self.realize_params(rng, day)?;
        let path = self.simulate_residual_path(rng, day);
        let curve = render_curve(&params, &path, self.model.m_c, cadence_min);
        let exposure = radiant_exposure(&curve);
        Ok(SimulatedDay { day, season: self.season_of(day), params, curve, residual_path: path, exposure })
    }

    /// Closed-form exposure for one draw, consuming randomness in the same
    /// order as [`Self::simulate_irradiance`].
    pub fn simulate_exposure<R: Rng + ?Sized>(&self, rng: &mut R, day: u32) -> Result<ExposureDraw> {
        let params = self.realize_params(rng, day)?;
        let path = self.simulate_residual_path(rng, day);
        let exposure = closed_form_exposure(params.b, params.c, trapezoid_residual_integral(&path), self.model.m_c);
        Ok(ExposureDraw { params, residual_path: path, exposure })
    }

    /// Expected residual at each node, from the column mean rates.
    pub fn expected_residual_path(&self, day: u32) -> Vec<f64> {
        let grid = self.grid();
        let s = self.sampler(day);
        let mut path = vec![0.0; grid.len()];
        for j in 1..grid.len() {
            path[j] = path[j - 1] + grid.spacing() * s.column(j).mean;
        }
        path
    }

    /// `E[I] = (m_c/60)·(B̃ + E[x_B])·(C̃ + E[x_C])·(4/3 + ∫E[R*])`.
    pub fn expected_exposure(&self, day: u32) -> f64 {
        let t = &self.model.trends;
        let d = day_of_cycle(day) as f64;
        let b = t.b.trend.eval(d) + t.b.residual.expected();
        let c = t.c.trend.eval(d) + t.c.residual.expected();
        let r = trapezoid_residual_integral(&self.expected_residual_path(day));
        closed_form_exposure(b, c, r, self.model.m_c)
    }

    /// Expected irradiance profile built from expected parameters and residuals.
    pub fn expected_curve(&self, day: u32, cadence_min: u32) -> Vec<(f64, f64)> {
        let t = &self.model.trends;
        let d = day_of_cycle(day) as f64;
        let p = FitParams {
            day,
            a: t.a.trend.eval(d) + t.a.residual.expected(),
            b: t.b.trend.eval(d) + t.b.residual.expected(),
            c: t.c.trend.eval(d) + t.c.residual.expected(),
        };
        render_curve(&p, &self.expected_residual_path(day), self.model.m_c, cadence_min)
    }
}

/// Piecewise-linear interpolation of a node path at `m* ∈ [−1, 1]`.
pub fn interpolate_path(path: &[f64], m_star: f64) -> f64 {
    let j = (path.len() - 1) as f64;
    let pos = ((m_star + 1.0) * j / 2.0).clamp(0.0, j);
    let k = (pos.floor() as usize).min(path.len() - 2);
    let w = pos - k as f64;
    path[k] * (1.0 - w) + path[k + 1] * w
}

/// De-normalizes a residual path into an irradiance curve, clamped at zero.
pub fn render_curve(p: &FitParams, path: &[f64], m_c: f64, cadence_min: u32) -> Vec<(f64, f64)> {
    (0..=MINUTES_PER_DAY)
        .step_by(cadence_min as usize)
        .map(|m| {
            let m = m as f64;
            let m_star = (m / m_c - p.a) / p.b;
            let e = if m_star.abs() <= 1.0 {
                (p.c * (1.0 - m_star * m_star + interpolate_path(path, m_star))).max(0.0)
            } else {
                0.0
            };
            (m, e)
        })
        .collect()
}

/// `I = (1/60)·∫E dm` by the trapezoid rule, W·h/m².
pub fn radiant_exposure(curve: &[(f64, f64)]) -> f64 {
    let (m, e): (Vec<f64>, Vec<f64>) = curve.iter().copied().unzip();
    stats::trapezoid(&m, &e) / 60.0
}

/// `(1/J)·[R*₀ + 2·Σ R*ⱼ + R*_J]`.
pub fn trapezoid_residual_integral(path: &[f64]) -> f64 {
    let j = (path.len() - 1) as f64;
    let inner: f64 = path[1..path.len() - 1].iter().sum();
    (path[0] + 2.0 * inner + path[path.len() - 1]) / j
}

pub fn closed_form_exposure(b: f64, c: f64, residual_integral: f64, m_c: f64) -> f64 {
    m_c / 60.0 * b * c * (4.0 / 3.0 + residual_integral)
}

pub fn write_curves_csv<W: std::io::Write>(out: W, days: &[SimulatedDay]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "minute", "irradiance_wm2"])?;
    for d in days {
        for &(m, e) in d.curve.iter().filter(|(m, _)| *m < MINUTES_PER_DAY as f64) {
            w.write_record([d.day.to_string(), (m as u32).to_string(), format!("{e:.6}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_exposure_csv<W: std::io::Write>(out: W, rows: &[(u32, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "exposure_whm2"])?;
    for (d, i) in rows {
        w.write_record([d.to_string(), format!("{i:.6}")])?;
    }
    w.flush()?;
    Ok(())
}
