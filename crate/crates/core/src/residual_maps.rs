//! Per-season probability maps of the residual rate of change `r* = dR*/dm*`
//! on the discrete normalized-time grid `m*ⱼ = −1 + 2j/J`.
//!
//! Two forms are built from the same samples: a discrete map (per-column
//! histograms over shared Freedman–Diaconis bins, unit mass per column) and a
//! Gaussian KDE map with one global rule-of-thumb bandwidth. A second KDE over
//! the observed node residuals `R*ⱼ` bounds the simulated residual paths.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::daily_fit::ResidualSample;
use crate::error::{Error, Result};
use crate::stats;

/// Evaluation points per column density.
pub const KDE_EVAL_POINTS: usize = 1025;
/// Half-width of the evaluation range beyond the sample hull, in bandwidths.
pub const KDE_TAIL_BANDWIDTHS: f64 = 8.0;
/// Density level delimiting the allowable range of a column.
pub const SUPPORT_THRESHOLD: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MstarGrid {
    pub j: usize,
}

impl MstarGrid {
    pub fn new(j: usize) -> Result<Self> {
        if j < 2 {
            return Err(Error::Grid(format!("J = {j}; need at least 2 intervals")));
        }
        Ok(Self { j })
    }

    pub fn len(&self) -> usize {
        self.j + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 / self.j as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        -1.0 + 2.0 * k as f64 / self.j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.j).map(|k| self.node(k)).collect()
    }

    /// Column whose node is closest to `m_star`, clamped to the grid.
    pub fn nearest(&self, m_star: f64) -> usize {
        let k = ((m_star + 1.0) * self.j as f64 / 2.0).round();
        k.clamp(0.0, self.j as f64) as usize
    }
}

/// `J = ⌊m_c·⟨B⟩/5⌋`, i.e. nodes roughly five minutes of half-daytime apart.
pub fn build_grid(mean_b: f64, m_c: f64) -> Result<MstarGrid> {
    if !(mean_b > 0.0) || !(m_c > 0.0) {
        return Err(Error::Grid(format!("mean B {mean_b}, m_c {m_c}")));
    }
    MstarGrid::new((m_c * mean_b / 5.0).floor() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeResidual {
    pub j: usize,
    pub r_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub j: usize,
    pub r_star: f64,
}

/// Linear interpolation of one day's residuals onto the grid nodes inside the
/// day's observed `m*` range.
pub fn interpolate_residuals(residuals: &[ResidualSample], grid: &MstarGrid) -> Vec<NodeResidual> {
    let mut pts: Vec<(f64, f64)> = residuals.iter().map(|r| (r.m_star, r.r_star)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    let (Some(&(lo, _)), Some(&(hi, _))) = (pts.first(), pts.last()) else {
        return Vec::new();
    };
    (0..=grid.j)
        .filter_map(|k| {
            let x = grid.node(k);
            if x < lo || x > hi {
                return None;
            }
            let i = pts.partition_point(|p| p.0 <= x);
            let r = if i == 0 {
                pts[0].1
            } else if i == pts.len() {
                pts[pts.len() - 1].1
            } else {
                let (a, b) = (pts[i - 1], pts[i]);
                a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1)
            };
            Some(NodeResidual { j: k, r_star: r })
        })
        .collect()
}

fn rates_from_nodes(nodes: &[NodeResidual], grid: &MstarGrid) -> Vec<RateSample> {
    let half_j = grid.j as f64 / 2.0;
    nodes
        .windows(2)
        .filter(|w| w[1].j == w[0].j + 1)
        .map(|w| RateSample { j: w[1].j, r_star: (w[1].r_star - w[0].r_star) * half_j })
        .filter(|s| s.r_star.abs() <= half_j)
        .collect()
}

/// Finite-difference rates `r*ⱼ = (R*ⱼ − R*ⱼ₋₁)·J/2` between consecutive
/// covered nodes, keeping only `|r*| ≤ J/2`.
pub fn column_rates(residuals: &[ResidualSample], grid: &MstarGrid) -> Result<Vec<RateSample>> {
    let nodes = interpolate_residuals(residuals, grid);
    if nodes.len() < 2 {
        return Err(Error::InsufficientData(format!("{} grid nodes covered, need 2", nodes.len())));
    }
    Ok(rates_from_nodes(&nodes, grid))
}

/// Shared histogram bins for every column of every season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub lo: f64,
    pub hi: f64,
    /// Bin count `M_r`.
    pub bins: usize,
    /// Bin width `Δr*`.
    pub width: f64,
}

impl Binning {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins == 0 {
            return Err(Error::Binning(format!("range [{lo}, {hi}] with {bins} bins")));
        }
        Ok(Self { lo, hi, bins, width: (hi - lo) / bins as f64 })
    }

    pub fn edges(&self) -> Vec<f64> {
        (0..=self.bins)
            .map(|k| if k == self.bins { self.hi } else { self.lo + k as f64 * self.width })
            .collect()
    }

    pub fn index(&self, x: f64) -> usize {
        (((x - self.lo) / self.width).floor().max(0.0) as usize).min(self.bins - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdColumn {
    pub j: usize,
    pub width: f64,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdBinning {
    pub binning: Binning,
    pub columns: Vec<FdColumn>,
    /// Columns left out of the average (fewer than 2 samples or zero IQR).
    pub excluded: Vec<usize>,
}

/// Freedman–Diaconis per column (`Δⱼ = 2·IQR/ℓⱼ^{1/3}`, `Mⱼ = ⌈range/Δⱼ⌉`),
/// averaged into one bin count `M_r = ⌈mean Mⱼ⌉` and width `range/M_r` over
/// the global sample range.
pub fn freedman_diaconis_bins(columns: &[Vec<f64>]) -> Result<FdBinning> {
    let mut used = Vec::new();
    let mut excluded = Vec::new();
    for (j, col) in columns.iter().enumerate() {
        if col.is_empty() {
            continue;
        }
        let iqr = if col.len() >= 2 { stats::iqr(col) } else { 0.0 };
        if !(iqr > 0.0) {
            excluded.push(j);
            continue;
        }
        let width = 2.0 * iqr / (col.len() as f64).cbrt();
        let (lo, hi) = stats::min_max(col).expect("non-empty");
        let bins = (((hi - lo) / width).ceil() as usize).max(1);
        used.push(FdColumn { j, width, bins });
    }
    if used.is_empty() {
        return Err(Error::Binning("no column has two samples with non-zero IQR".into()));
    }
    if !excluded.is_empty() {
        warn!("freedman-diaconis: {} columns excluded (degenerate IQR)", excluded.len());
    }
    let mean_bins = used.iter().map(|c| c.bins as f64).sum::<f64>() / used.len() as f64;
    let all: Vec<f64> = columns.iter().flatten().copied().collect();
    let (lo, hi) = stats::min_max(&all).expect("non-empty");
    let binning = Binning::new(lo, hi, (mean_bins.ceil() as usize).max(1))?;
    Ok(FdBinning { binning, columns: used, excluded })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteProbabilityMap {
    pub season: u8,
    pub grid: MstarGrid,
    pub bin_edges: Vec<f64>,
    /// `mass[j][k]`: probability of bin `k` in column `j`; all zero for empty columns.
    pub mass: Vec<Vec<f64>>,
}

impl DiscreteProbabilityMap {
    pub fn empty_columns(&self) -> Vec<usize> {
        self.mass
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().all(|&v| v == 0.0))
            .map(|(j, _)| j)
            .collect()
    }

    /// Each column divided by its maximum, for display.
    pub fn max_scaled(&self) -> Vec<Vec<f64>> {
        self.mass
            .iter()
            .map(|col| {
                let m = col.iter().copied().fold(0.0, f64::max);
                col.iter().map(|&v| if m > 0.0 { v / m } else { 0.0 }).collect()
            })
            .collect()
    }
}

pub fn build_discrete_map(
    columns: &[Vec<f64>],
    grid: &MstarGrid,
    binning: &Binning,
    season: u8,
) -> DiscreteProbabilityMap {
    let mass = (0..=grid.j)
        .map(|j| {
            let mut counts = vec![0.0; binning.bins];
            let col = columns.get(j).map(Vec::as_slice).unwrap_or(&[]);
            for &x in col {
                counts[binning.index(x)] += 1.0;
            }
            let n = col.len() as f64;
            if n > 0.0 {
                counts.iter_mut().for_each(|c| *c /= n);
            }
            counts
        })
        .collect();
    DiscreteProbabilityMap { season, grid: *grid, bin_edges: binning.edges(), mass }
}

/// Gaussian kernel `exp(−u²/2)/√(2π)`.
pub fn gaussian_kernel(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// Normal-reference bandwidth `hⱼ = (4/(3ℓⱼ))^{1/5}·σ̂ⱼ` per column, averaged.
/// Columns with fewer than 2 samples or zero spread are skipped.
pub fn kde_bandwidth(columns: &[Vec<f64>]) -> Result<f64> {
    let hs: Vec<f64> = columns
        .iter()
        .filter(|c| c.len() >= 2)
        .filter_map(|c| {
            let sd = stats::std_dev(c);
            (sd > 0.0).then(|| (4.0 / (3.0 * c.len() as f64)).powf(0.2) * sd)
        })
        .collect();
    if hs.is_empty() {
        return Err(Error::Bandwidth("no column with two samples and non-zero spread".into()));
    }
    Ok(stats::mean(&hs))
}

/// `f̂ₕ(x) = (1/(h·S))·Σ K((x − xₛ)/h)`.
pub fn kde_density(samples: &[f64], h: f64, x: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| gaussian_kernel((x - s) / h)).sum::<f64>() / (h * samples.len() as f64)
}

/// A column's KDE tabulated on `[min − 8h, max + 8h]`, with its cumulative
/// distribution for inverse-transform sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnDensity {
    pub bandwidth: f64,
    pub xs: Vec<f64>,
    pub density: Vec<f64>,
    /// Trapezoidal cumulative integral normalized to end at exactly 1.
    pub cdf: Vec<f64>,
    /// Mean of the estimator (equal to the sample mean for a symmetric kernel).
    pub mean: f64,
    raw_integral: f64,
}

impl ColumnDensity {
    pub fn new(samples: &[f64], h: f64) -> Option<Self> {
        if samples.is_empty() || !(h > 0.0) {
            return None;
        }
        let (lo, hi) = stats::min_max(samples)?;
        let a = lo - KDE_TAIL_BANDWIDTHS * h;
        let b = hi + KDE_TAIL_BANDWIDTHS * h;
        let step = (b - a) / (KDE_EVAL_POINTS - 1) as f64;
        let xs: Vec<f64> = (0..KDE_EVAL_POINTS).map(|i| a + i as f64 * step).collect();
        let density: Vec<f64> = xs.iter().map(|&x| kde_density(samples, h, x)).collect();
        let mut cdf = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..xs.len() {
            acc += 0.5 * step * (density[i - 1] + density[i]);
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        *cdf.last_mut().expect("non-empty") = 1.0;
        Some(Self { bandwidth: h, xs, density, cdf, mean: stats::mean(samples), raw_integral: total })
    }

    /// Trapezoidal integral of the tabulated density before normalization.
    pub fn integral(&self) -> f64 {
        self.raw_integral
    }

    /// Inverse of the piecewise-linear CDF.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let k = self.cdf.partition_point(|&c| c < u);
        if k == 0 {
            return self.xs[0];
        }
        if k >= self.cdf.len() {
            return self.xs[self.xs.len() - 1];
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        if c1 > c0 {
            x0 + (u - c0) / (c1 - c0) * (x1 - x0)
        } else {
            x0
        }
    }

    /// Scaled-PDM values `h·f̂ₕ` on the evaluation grid.
    pub fn scaled(&self) -> Vec<f64> {
        self.density.iter().map(|f| f * self.bandwidth).collect()
    }
}

/// Hull of the evaluation points where the density exceeds `threshold`.
pub fn column_support(col: &ColumnDensity, threshold: f64) -> Result<(f64, f64)> {
    let mut above = col.xs.iter().zip(&col.density).filter(|(_, &f)| f > threshold).map(|(x, _)| *x);
    let first = above.next().ok_or(Error::EmptySupport { threshold })?;
    let last = above.last().unwrap_or(first);
    Ok((first, last))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KdeMap {
    pub season: u8,
    pub grid: MstarGrid,
    pub bandwidth: f64,
    /// Rate samples per column `j = 0..=J`.
    pub columns: Vec<Vec<f64>>,
}

impl KdeMap {
    pub fn column_density(&self, j: usize) -> Option<ColumnDensity> {
        ColumnDensity::new(self.columns.get(j)?, self.bandwidth)
    }

    /// `h·f̂ₕ(r*)` for column `j` at arbitrary points; zeros for an empty column.
    pub fn scaled_pdm(&self, j: usize, r: &[f64]) -> Vec<f64> {
        let col = self.columns.get(j).map(Vec::as_slice).unwrap_or(&[]);
        r.iter().map(|&x| self.bandwidth * kde_density(col, self.bandwidth, x)).collect()
    }
}

/// Everything learned from the residuals of one season.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonMap {
    pub season: u8,
    pub rates: KdeMap,
    /// Observed node residuals `R*ⱼ` per column, for the allowable-range KDE.
    pub residual_columns: Vec<Vec<f64>>,
    pub discrete: DiscreteProbabilityMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSet {
    pub grid: MstarGrid,
    /// Rate bandwidth pooled over all seasons.
    pub bandwidth: f64,
    /// Bandwidth of the node-residual KDE, same rule.
    pub envelope_bandwidth: f64,
    pub binning: Binning,
    pub seasons: Vec<SeasonMap>,
}

/// Day-level input to map construction.
pub struct DayResiduals<'a> {
    pub day: u32,
    pub season: u8,
    pub residuals: &'a [ResidualSample],
}

fn empty_columns(grid: &MstarGrid) -> Vec<Vec<f64>> {
    vec![Vec::new(); grid.len()]
}

/// Builds discrete and KDE maps for each season id in `season_ids`. Bandwidths
/// and bins are computed once from the pooled columns of all seasons.
pub fn build_maps(days: &[DayResiduals<'_>], grid: &MstarGrid, season_ids: &[u8]) -> Result<MapSet> {
    let mut rates: Vec<Vec<Vec<f64>>> = season_ids.iter().map(|_| empty_columns(grid)).collect();
    let mut nodes: Vec<Vec<Vec<f64>>> = season_ids.iter().map(|_| empty_columns(grid)).collect();
    for day in days {
        let Some(si) = season_ids.iter().position(|&s| s == day.season) else {
            return Err(Error::InvalidInput(format!("day {} has unknown season {}", day.day, day.season)));
        };
        let node_res = interpolate_residuals(day.residuals, grid);
        if node_res.len() < 2 {
            warn!("day {}: {} grid nodes covered, skipped", day.day, node_res.len());
            continue;
        }
        for n in &node_res {
            nodes[si][n.j].push(n.r_star);
        }
        for r in rates_from_nodes(&node_res, grid) {
            rates[si][r.j].push(r.r_star);
        }
    }
    let per_season = season_ids.iter().copied().zip(rates.into_iter().zip(nodes)).map(|(s, (r, n))| (s, r, n)).collect();
    build_maps_from_columns(grid, per_season, None, None)
}

/// Assembles a [`MapSet`] from per-season `(season, rate columns, node-residual
/// columns)`. Bandwidths default to the pooled rule-of-thumb values.
pub fn build_maps_from_columns(
    grid: &MstarGrid,
    per_season: Vec<(u8, Vec<Vec<f64>>, Vec<Vec<f64>>)>,
    bandwidth: Option<f64>,
    envelope_bandwidth: Option<f64>,
) -> Result<MapSet> {
    let mut pooled_rates = empty_columns(grid);
    let mut pooled_nodes = empty_columns(grid);
    for (_, r, n) in &per_season {
        if r.len() != grid.len() || n.len() != grid.len() {
            return Err(Error::Grid(format!("columns do not match J = {}", grid.j)));
        }
        for j in 0..grid.len() {
            pooled_rates[j].extend_from_slice(&r[j]);
            pooled_nodes[j].extend_from_slice(&n[j]);
        }
    }
    let bandwidth = match bandwidth {
        Some(h) => h,
        None => kde_bandwidth(&pooled_rates)?,
    };
    let envelope_bandwidth = match envelope_bandwidth {
        Some(h) => h,
        None => kde_bandwidth(&pooled_nodes)?,
    };
    if !(bandwidth > 0.0) || !(envelope_bandwidth > 0.0) {
        return Err(Error::Bandwidth(format!("non-positive bandwidth {bandwidth} / {envelope_bandwidth}")));
    }
    let fd = freedman_diaconis_bins(&pooled_rates)?;
    let seasons = per_season
        .into_iter()
        .map(|(season, rate_cols, node_cols)| SeasonMap {
            season,
            discrete: build_discrete_map(&rate_cols, grid, &fd.binning, season),
            rates: KdeMap { season, grid: *grid, bandwidth, columns: rate_cols },
            residual_columns: node_cols,
        })
        .collect();
    Ok(MapSet { grid: *grid, bandwidth, envelope_bandwidth, binning: fd.binning, seasons })
}

/// Long-format plot data `m_star,r_star,value` for a discrete map (bin centres).
pub fn write_discrete_map_csv<W: std::io::Write>(out: W, map: &DiscreteProbabilityMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m_star", "r_star", "value"])?;
    for (j, col) in map.mass.iter().enumerate() {
        for (k, v) in col.iter().enumerate() {
            let centre = 0.5 * (map.bin_edges[k] + map.bin_edges[k + 1]);
            w.write_record([map.grid.node(j).to_string(), centre.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Long-format scaled-PDM plot data over `points` values spanning `[lo, hi]`.
pub fn write_scaled_pdm_csv<W: std::io::Write>(out: W, map: &KdeMap, lo: f64, hi: f64, points: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["m_star", "r_star", "value"])?;
    let r: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points.max(2) - 1) as f64)
        .collect();
    for j in 0..=map.grid.j {
        for (x, v) in r.iter().zip(map.scaled_pdm(j, &r)) {
            w.write_record([map.grid.node(j).to_string(), x.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn res(points: &[(f64, f64)]) -> Vec<ResidualSample> {
        points.iter().map(|&(m_star, r_star)| ResidualSample { m_star, r_star }).collect()
    }

    #[test]
    fn reference_grid() {
        let g = build_grid(0.8990, 360.0).unwrap();
        assert_eq!(g.j, 64);
        assert_eq!(g.nodes().len(), 65);
        assert_eq!(g.spacing(), 0.03125);
        assert_eq!(build_grid(1.0, 360.0).unwrap().j, 72);
        assert!(build_grid(0.02, 360.0).is_err());
    }

    #[test]
    fn endpoints_exact() {
        for j in 2..500 {
            let g = MstarGrid::new(j).unwrap();
            assert_eq!(g.node(0), -1.0);
            assert_eq!(g.node(j), 1.0);
        }
    }

    #[test]
    fn rates_examples() {
        let g = MstarGrid::new(64).unwrap();
        let zero = res(&g.nodes().iter().map(|&m| (m, 0.0)).collect::<Vec<_>>());
        assert!(column_rates(&zero, &g).unwrap().iter().all(|r| r.r_star == 0.0));

        let lin = res(&g.nodes().iter().map(|&m| (m, m)).collect::<Vec<_>>());
        let r = column_rates(&lin, &g).unwrap();
        assert_eq!(r.len(), 64);
        assert!(r.iter().all(|s| (s.r_star - 1.0).abs() < 1e-12 && s.j >= 1));

        let three = res(&[(g.node(0), 0.0), (g.node(1), 0.1), (g.node(2), 0.05)]);
        let r = column_rates(&three, &g).unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].r_star - 3.2).abs() < 1e-12 && r[0].j == 1);
        assert!((r[1].r_star + 1.6).abs() < 1e-12 && r[1].j == 2);

        let one = res(&[(0.0, 0.1)]);
        assert!(matches!(column_rates(&one, &g), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn rates_trimmed_to_half_j() {
        let g = MstarGrid::new(4).unwrap();
        // jump of 1.5 over spacing 0.5 → r* = 3 > J/2 = 2
        let jump = res(&[(-1.0, 0.0), (-0.5, 1.5), (0.0, 1.5)]);
        let r = column_rates(&jump, &g).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].j, 2);
    }

    #[test]
    fn fd_uniform_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let col: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let fd = freedman_diaconis_bins(&[Vec::new(), col.clone()]).unwrap();
        let c = &fd.columns[0];
        let iqr = stats::iqr(&col);
        assert!((iqr - 0.5).abs() < 0.05);
        assert!((c.width - 0.1).abs() < 0.01);
        assert_eq!(c.bins, ((col.iter().cloned().fold(0.0, f64::max) - col.iter().cloned().fold(1.0, f64::min)) / c.width).ceil() as usize);
    }

    #[test]
    fn fd_excludes_degenerate_columns() {
        let fd = freedman_diaconis_bins(&[vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 2.0, 3.0]]).unwrap();
        assert_eq!(fd.excluded, vec![0]);
        assert_eq!(fd.columns.len(), 1);
        assert!(freedman_diaconis_bins(&[vec![1.0; 4], vec![]]).is_err());
    }

    #[test]
    fn discrete_map_examples() {
        let g = MstarGrid::new(4).unwrap();
        let b = Binning::new(-1.0, 1.0, 4).unwrap();
        let zeros = vec![vec![], vec![0.0; 10], vec![0.0; 3], vec![], vec![0.0]];
        let m = build_discrete_map(&zeros, &g, &b, 1);
        for j in [1, 2, 4] {
            assert_eq!(m.mass[j][b.index(0.0)], 1.0);
            assert_eq!(m.mass[j].iter().sum::<f64>(), 1.0);
        }
        assert_eq!(m.empty_columns(), vec![0, 3]);

        let sym = vec![vec![-0.75, 0.75, -0.75, 0.75]; 5];
        let m = build_discrete_map(&sym, &g, &b, 1);
        assert_eq!(m.mass[2], vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn discrete_map_recovers_generating_masses() {
        let g = MstarGrid::new(2).unwrap();
        let b = Binning::new(0.0, 4.0, 4).unwrap();
        let probs = [0.1, 0.2, 0.3, 0.4];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut col = Vec::new();
        for _ in 0..10_000 {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let k = probs.iter().position(|p| {
                acc += p;
                u < acc
            });
            col.push(k.unwrap_or(3) as f64 + 0.5);
        }
        let m = build_discrete_map(&[vec![], col.clone(), col], &g, &b, 2);
        for (k, p) in probs.iter().enumerate() {
            assert!((m.mass[1][k] - p).abs() < 3.0 / 100.0);
        }
    }

    #[test]
    fn bandwidth_examples() {
        assert!(kde_bandwidth(&[vec![1.0]]).is_err());
        // samples ±1 alternating have σ̂ = 1·√(ℓ/(ℓ−1)); rescale to exactly 1
        let l = 1000;
        let scale = ((l - 1) as f64 / l as f64).sqrt();
        let col: Vec<f64> = (0..l).map(|i| if i % 2 == 0 { scale } else { -scale }).collect();
        let h = kde_bandwidth(&[col.clone(), col, vec![]]).unwrap();
        assert!((h - (4.0f64 / 3000.0).powf(0.2)).abs() < 1e-12);
        assert!((h - 0.2661).abs() < 1e-4);
    }

    #[test]
    fn kde_examples() {
        assert!((kde_density(&[0.0], 1.0, 0.0) - 0.39894).abs() < 1e-5);
        assert!((kde_density(&[0.0], 1.0, 0.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let two = kde_density(&[-1.0, 1.0], 1.0, 0.0);
        assert!((two - (-0.5f64).exp() / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((two - 0.24197).abs() < 1e-5);
    }

    #[test]
    fn scaled_pdm_examples() {
        let g = MstarGrid::new(2).unwrap();
        let h = 0.0364;
        let map = KdeMap { season: 1, grid: g, bandwidth: h, columns: vec![vec![], vec![0.0], vec![0.1, 0.1, 0.1]] };
        let at = map.scaled_pdm(1, &[0.0])[0];
        assert!((at - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!(map.scaled_pdm(0, &[0.0, 1.0]).iter().all(|&v| v == 0.0));
        let col = map.column_density(2).unwrap();
        assert!(col.scaled().iter().all(|&v| (0.0..=0.39895).contains(&v)));
    }

    #[test]
    fn support_examples() {
        let h = 0.0364;
        let col = ColumnDensity::new(&[0.0], h).unwrap();
        // oracle: solve (1/(h√2π))·exp(−u²/2) = 0.001 for u by bisection
        let f = |u: f64| (-0.5 * u * u).exp() / (h * (2.0 * PI).sqrt()) - 0.001;
        let (mut a, mut b) = (0.0, 10.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if f(m) > 0.0 { a = m } else { b = m }
        }
        let r = a * h;
        let (lo, hi) = column_support(&col, SUPPORT_THRESHOLD).unwrap();
        let spacing = col.xs[1] - col.xs[0];
        assert!((hi - r).abs() <= spacing && (lo + r).abs() <= spacing, "{lo} {hi} {r}");
        assert!((r - 0.1570).abs() < 1e-3);

        let (lo, hi) = column_support(&col, 0.0).unwrap();
        assert_eq!((lo, hi), (col.xs[0], col.xs[KDE_EVAL_POINTS - 1]));

        let two = ColumnDensity::new(&[-1.0, 1.0], h).unwrap();
        let (lo, hi) = column_support(&two, SUPPORT_THRESHOLD).unwrap();
        assert!(lo < -1.0 && hi > 1.0);
        assert!(matches!(column_support(&col, 1e6), Err(Error::EmptySupport { .. })));
    }

    #[test]
    fn inverse_cdf_symmetric_median() {
        let col = ColumnDensity::new(&[-0.2, 0.0, 0.2], 0.05).unwrap();
        assert!(col.inverse_cdf(0.5).abs() < 1e-9);
        assert_eq!(col.inverse_cdf(0.0), col.xs[0]);
        let top = col.inverse_cdf(1.0);
        assert!(top > 0.2 && top <= *col.xs.last().unwrap());
    }

    #[test]
    fn maps_from_on_master_days_are_zero() {
        let g = MstarGrid::new(16).unwrap();
        let days: Vec<Vec<ResidualSample>> = (0..4)
            .map(|k| res(&(0..40).map(|i| (-1.0 + i as f64 * 0.05 + 0.001 * k as f64, 0.0)).collect::<Vec<_>>()))
            .collect();
        let input: Vec<_> = days
            .iter()
            .enumerate()
            .map(|(d, r)| DayResiduals { day: d as u32, season: 1, residuals: r })
            .collect();
        // zero rates everywhere: no spread, so bandwidth cannot be formed
        assert!(matches!(build_maps(&input, &g, &[1]), Err(Error::Bandwidth(_))));
        for r in &days {
            assert!(column_rates(r, &g).unwrap().iter().all(|s| s.r_star == 0.0));
        }
    }

    proptest! {
        #[test]
        fn kde_columns_integrate_to_one(samples in proptest::collection::vec(-3.0f64..3.0, 1..40), h in 0.01f64..0.5) {
            let col = ColumnDensity::new(&samples, h).unwrap();
            prop_assert!((col.integral() - 1.0).abs() < 1e-4);
            prop_assert!(col.scaled().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }

        #[test]
        fn discrete_columns_sum_to_one(cols in proptest::collection::vec(proptest::collection::vec(-5.0f64..5.0, 0..60), 3..10)) {
            let g = MstarGrid::new(cols.len() - 1).unwrap();
            let all: Vec<f64> = cols.iter().flatten().copied().collect();
            prop_assume!(all.len() >= 2);
            let (lo, hi) = stats::min_max(&all).unwrap();
            prop_assume!(hi > lo);
            let b = Binning::new(lo, hi, 17).unwrap();
            let m = build_discrete_map(&cols, &g, &b, 1);
            for (j, col) in cols.iter().enumerate() {
                if !col.is_empty() {
                    prop_assert!((m.mass[j].iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}
