//! Annual trends of the normalization parameters and the minimum-type Gumbel
//! distributions of their residuals.
//!
//! Each parameter `Y ∈ {A, B, C}` follows
//! `Ỹ(d) = y₀ + y₁·cos(2π(d − 172)/365) + y₂·cos(4π(d − 172)/365)`
//! and the day-to-day scatter `x = Y − Ỹ` has density
//! `f(x) = (1/ν)·exp{(x − μ)/ν − exp[(x − μ)/ν]}` with mean `μ − νγ`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::YEAR_DAYS;
use crate::linalg::least_squares;

/// Day of the summer solstice; phase origin of the cosine basis.
pub const SOLSTICE_DAY: f64 = 172.0;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const GUMBEL_MAX_ITER: usize = 200;
const GUMBEL_STEP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendCoefficients {
    pub y0: f64,
    pub y1: f64,
    pub y2: f64,
}

impl TrendCoefficients {
    pub fn eval(&self, day: f64) -> f64 {
        eval_trend(self, day)
    }
}

fn basis(day: f64) -> [f64; 3] {
    let phase = 2.0 * PI * (day - SOLSTICE_DAY) / YEAR_DAYS as f64;
    [1.0, phase.cos(), (2.0 * phase).cos()]
}

pub fn eval_trend(c: &TrendCoefficients, day: f64) -> f64 {
    let d = day.rem_euclid(YEAR_DAYS as f64);
    let [_, c1, c2] = basis(d);
    c.y0 + c.y1 * c1 + c.y2 * c2
}

/// Least-squares fit of the constant-plus-two-harmonics trend.
pub fn fit_trend(series: &[(f64, f64)]) -> Result<TrendCoefficients> {
    let mut days: Vec<f64> = series.iter().map(|p| p.0.rem_euclid(YEAR_DAYS as f64)).collect();
    days.sort_by(f64::total_cmp);
    days.dedup();
    if days.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} distinct days, need 3", days.len())));
    }
    let rows: Vec<Vec<f64>> = series.iter().map(|p| basis(p.0).to_vec()).collect();
    let ys: Vec<f64> = series.iter().map(|p| p.1).collect();
    let y = least_squares(&rows, &ys, 3)?;
    Ok(TrendCoefficients { y0: y[0], y1: y[1], y2: y[2] })
}

/// Rice's rule bin count `⌈2·n^{1/3}⌉`.
pub fn rice_bins(n: usize) -> usize {
    (2.0 * (n as f64).cbrt()).ceil() as usize
}

/// Rice's rule bin width `(max − min) / (2·n^{1/3})`.
pub fn rice_width(values: &[f64]) -> Result<f64> {
    let (lo, hi) = crate::stats::min_max(values).ok_or(Error::ZeroRange)?;
    if !(hi > lo) {
        return Err(Error::ZeroRange);
    }
    Ok((hi - lo) / (2.0 * (values.len() as f64).cbrt()))
}

/// Minimum-type Gumbel distribution (long left tail).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGumbel")]
pub struct GumbelParams {
    pub mu: f64,
    pub nu: f64,
}

#[derive(Deserialize)]
struct RawGumbel {
    mu: f64,
    nu: f64,
}

impl TryFrom<RawGumbel> for GumbelParams {
    type Error = Error;

    fn try_from(r: RawGumbel) -> Result<Self> {
        GumbelParams::new(r.mu, r.nu)
    }
}

impl GumbelParams {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || !nu.is_finite() || nu <= 0.0 {
            return Err(Error::InvalidInput(format!("Gumbel parameters mu={mu}, nu={nu}")));
        }
        Ok(Self { mu, nu })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        gumbel_pdf(x, self)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.nu;
        -(-z.exp()).exp_m1()
    }

    /// Inverse CDF: `μ + ν·ln(−ln(1 − u))`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.mu + self.nu * (-(-u).ln_1p()).ln()
    }

    pub fn expected(&self) -> f64 {
        gumbel_expected(self)
    }

    pub fn std_dev(&self) -> f64 {
        self.nu * PI / 6f64.sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_gumbel(rng, self)
    }
}

pub fn gumbel_pdf(x: f64, p: &GumbelParams) -> f64 {
    let z = (x - p.mu) / p.nu;
    (z - z.exp()).exp() / p.nu
}

pub fn gumbel_expected(p: &GumbelParams) -> f64 {
    p.mu - p.nu * EULER_GAMMA
}

/// Inverse-transform draw.
pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R, p: &GumbelParams) -> f64 {
    // u ∈ [0, 1); reflect so the argument of ln(−ln(1 − u)) never hits ln(0)
    let u: f64 = rng.random();
    let u = if u == 0.0 { f64::MIN_POSITIVE } else { u };
    p.quantile(u)
}

/// Maximum-likelihood fit started from moment estimates.
///
/// The scale solves `ν = Σxᵢwᵢ/Σwᵢ − x̄` with `wᵢ = exp(xᵢ/ν)` (Newton, the
/// derivative being `1 + Var_w(x)/ν²`), then `μ = ν·ln(mean wᵢ)`.
pub fn fit_gumbel(xs: &[f64]) -> Result<GumbelParams> {
    if xs.len() < 10 {
        return Err(Error::GumbelFit(format!("{} samples, need at least 10", xs.len())));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::GumbelFit("non-finite sample".into()));
    }
    let mean = crate::stats::mean(xs);
    let sd = crate::stats::std_dev(xs);
    if !(sd > 0.0) {
        return Err(Error::GumbelFit("zero scale: constant sample".into()));
    }
    let xmax = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weighted = |nu: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &x in xs {
            let w = ((x - xmax) / nu).exp();
            s0 += w;
            s1 += w * x;
            s2 += w * x * x;
        }
        (s0, s1, s2)
    };

    let mut nu = sd * 6f64.sqrt() / PI;
    let mut converged = false;
    for _ in 0..GUMBEL_MAX_ITER {
        let (s0, s1, s2) = weighted(nu);
        let wmean = s1 / s0;
        let wvar = (s2 / s0 - wmean * wmean).max(0.0);
        let g = nu + mean - wmean;
        let dg = 1.0 + wvar / (nu * nu);
        let mut next = nu - g / dg;
        if !(next > 0.0) {
            next = nu / 2.0;
        }
        let step = (next - nu).abs();
        nu = next;
        if step <= GUMBEL_STEP_TOL * nu.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::GumbelFit(format!(
            "no convergence after {GUMBEL_MAX_ITER} iterations (n={}, mean={mean}, sd={sd}, last nu={nu})",
            xs.len()
        )));
    }
    let (s0, _, _) = weighted(nu);
    let mu = xmax + nu * (s0 / xs.len() as f64).ln();
    GumbelParams::new(mu, nu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamTrend {
    pub trend: TrendCoefficients,
    pub residual: GumbelParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendModel {
    pub a: ParamTrend,
    pub b: ParamTrend,
    pub c: ParamTrend,
    /// Dataset average of the half-daytime `B`.
    pub mean_b: f64,
}

impl TrendModel {
    /// Published reference coefficients and residual distributions.
    pub fn reference() -> Self {
        let pt = |y0, y1, y2, mu, nu| ParamTrend {
            trend: TrendCoefficients { y0, y1, y2 },
            residual: GumbelParams { mu, nu },
        };
        Self {
            a: pt(1.9790, -0.0017, 0.0005, 0.0028, 0.0064),
            b: pt(0.8990, 0.0689, -0.0089, 0.0048, 0.0111),
            c: pt(913.0363, 103.6416, -54.6980, 26.0092, 26.0947),
            mean_b: 0.8990,
        }
    }

    pub fn deterministic(&self, day: f64) -> (f64, f64, f64) {
        (self.a.trend.eval(day), self.b.trend.eval(day), self.c.trend.eval(day))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    /// Density scaled by bin width and sample count, comparable to `count`.
    pub pdf_scaled: f64,
}

/// Rice-rule histogram of residuals alongside the fitted density.
pub fn residual_histogram(xs: &[f64], p: &GumbelParams) -> Result<Vec<HistogramBin>> {
    let width = rice_width(xs)?;
    let bins = rice_bins(xs.len());
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut counts = vec![0usize; bins];
    for &x in xs {
        let k = (((x - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let n = xs.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| {
            let left = lo + k as f64 * width;
            let right = left + width;
            HistogramBin { left, right, count, pdf_scaled: p.pdf(0.5 * (left + right)) * width * n }
        })
        .collect())
}

pub fn write_histogram_csv<W: std::io::Write>(out: W, bins: &[HistogramBin]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_left", "bin_right", "count", "pdf_scaled"])?;
    for b in bins {
        w.write_record([
            b.left.to_string(),
            b.right.to_string(),
            b.count.to_string(),
            b.pdf_scaled.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
