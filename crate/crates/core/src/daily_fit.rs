//! Per-day parabolic fit `Ē(m) = C·{1 − [(m/m_c − A)/B]²}`, normalization of
//! raw data onto the dimensionless `(m*, E*)` plane and residuals against the
//! master curve `−(m*)²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{DailySeries, MINUTES_PER_DAY};
use crate::linalg::least_squares;

/// Characteristic short time: one half-daytime at the equator, in minutes.
pub const DEFAULT_M_C: f64 = 360.0;

/// Absolute floor of the daytime mask, W/m².
const DAYTIME_FLOOR_WM2: f64 = 5.0;
/// Relative floor of the daytime mask, as a fraction of the day's peak.
const DAYTIME_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub day: u32,
    /// Noon time in units of `m_c`.
    pub a: f64,
    /// Half-daytime in units of `m_c`.
    pub b: f64,
    /// Peak irradiance at noon, W/m².
    pub c: f64,
}

impl FitParams {
    /// Checks `B > 0`, `C > 0` and that sunrise and nightfall fall inside the day.
    pub fn validate(&self, m_c: f64) -> Result<()> {
        let finite = self.a.is_finite() && self.b.is_finite() && self.c.is_finite();
        if !finite || self.b <= 0.0 || self.c <= 0.0 {
            return Err(Error::DegenerateDay {
                day: self.day,
                reason: format!("non-physical parameters A={} B={} C={}", self.a, self.b, self.c),
            });
        }
        let (rise, fall) = daytime_bounds(self, m_c);
        if rise <= 0.0 || fall >= MINUTES_PER_DAY as f64 {
            return Err(Error::DegenerateDay {
                day: self.day,
                reason: format!("daytime [{rise:.1}, {fall:.1}] min leaves the day"),
            });
        }
        Ok(())
    }

    pub fn is_valid(&self, m_c: f64) -> bool {
        self.validate(m_c).is_ok()
    }

    /// Evaluates the fitted parabola (negative outside daytime).
    pub fn parabola(&self, minute: f64, m_c: f64) -> f64 {
        let u = (minute / m_c - self.a) / self.b;
        self.c * (1.0 - u * u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedSample {
    pub m_star: f64,
    pub e_star: f64,
    pub in_daytime: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub m_star: f64,
    pub r_star: f64,
}

/// Samples used for the fit: above `max(5 W/m², 1 % of the day's maximum)`.
pub fn daytime_mask(curve: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let peak = curve.iter().map(|p| p.1).fold(0.0, f64::max);
    let floor = DAYTIME_FLOOR_WM2.max(DAYTIME_FRACTION * peak);
    curve.iter().copied().filter(|p| p.1 > floor).collect()
}

/// Least-squares parabola through the daytime part of a smoothed curve given
/// as `(minute, irradiance)` pairs.
pub fn fit_parabola(day: u32, curve: &[(f64, f64)], m_c: f64) -> Result<FitParams> {
    let pts = daytime_mask(curve);
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "day {day}: {} daytime samples, need 3",
            pts.len()
        )));
    }
    // centred dimensionless abscissa keeps the design well conditioned
    let xs: Vec<f64> = pts.iter().map(|p| p.0 / m_c).collect();
    let x0 = xs.iter().sum::<f64>() / xs.len() as f64;
    let rows: Vec<Vec<f64>> = xs.iter().map(|x| vec![1.0, x - x0, (x - x0) * (x - x0)]).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let k = least_squares(&rows, &ys, 3).map_err(|e| match e {
        Error::DegenerateFit(r) => Error::DegenerateDay { day, reason: r },
        other => other,
    })?;
    let (k0, k1, k2) = (k[0], k[1], k[2]);
    if k2 >= 0.0 {
        return Err(Error::DegenerateDay { day, reason: format!("non-concave fit (c2 = {k2:e})") });
    }
    let c = k0 - k1 * k1 / (4.0 * k2);
    let a = x0 - k1 / (2.0 * k2);
    if c <= 0.0 {
        return Err(Error::DegenerateDay { day, reason: format!("non-positive peak {c}") });
    }
    let b = (-c / k2).sqrt();
    let p = FitParams { day, a, b, c };
    p.validate(m_c)?;
    Ok(p)
}

/// Sunrise and nightfall minutes `m_c·(A ∓ B)`.
pub fn daytime_bounds(p: &FitParams, m_c: f64) -> (f64, f64) {
    (m_c * (p.a - p.b), m_c * (p.a + p.b))
}

pub fn normalize_point(minute: f64, irradiance: f64, p: &FitParams, m_c: f64) -> NormalizedSample {
    let m_star = (minute / m_c - p.a) / p.b;
    NormalizedSample {
        m_star,
        e_star: irradiance / p.c - 1.0,
        in_daytime: m_star.abs() <= 1.0,
    }
}

/// Maps a raw day onto `(m*, E*)` with parameters fitted to its smoothed curve.
pub fn normalize(raw: &DailySeries, p: &FitParams, m_c: f64) -> Vec<NormalizedSample> {
    raw.samples
        .iter()
        .map(|s| normalize_point(s.minute as f64, s.irradiance, p, m_c))
        .collect()
}

/// Deterministic normalized-irradiance estimator.
pub fn master_curve(m_star: f64) -> f64 {
    -m_star * m_star
}

/// Residuals `E* − (−m*²)`, daytime samples only.
pub fn residuals(samples: &[NormalizedSample]) -> Vec<ResidualSample> {
    samples
        .iter()
        .filter(|s| s.in_daytime)
        .map(|s| ResidualSample { m_star: s.m_star, r_star: s.e_star - master_curve(s.m_star) })
        .collect()
}

pub fn write_fit_params_csv<W: std::io::Write>(out: W, params: &[FitParams]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "A", "B", "C"])?;
    for p in params {
        w.write_record([p.day.to_string(), p.a.to_string(), p.b.to_string(), p.c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fit_params_csv<R: std::io::Read>(src: R) -> Result<Vec<FitParams>> {
    let mut r = csv::Reader::from_reader(src);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::InvalidInput(format!("bad fit-params row {rec:?}")))
        };
        out.push(FitParams { day: num(0)? as u32, a: num(1)?, b: num(2)?, c: num(3)? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Sample;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn parabola_curve(p: &FitParams, m_c: f64) -> Vec<(f64, f64)> {
        (0..1440)
            .step_by(10)
            .map(|m| (m as f64, p.parabola(m as f64, m_c).max(0.0)))
            .collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn exact_round_trip() {
        let truth = FitParams { day: 0, a: 1.9790, b: 0.8990, c: 913.0 };
        let p = fit_parabola(0, &parabola_curve(&truth, 360.0), 360.0).unwrap();
        assert!(rel(p.a, truth.a) < 1e-9, "{p:?}");
        assert!(rel(p.b, truth.b) < 1e-9, "{p:?}");
        assert!(rel(p.c, truth.c) < 1e-9, "{p:?}");
    }

    #[test]
    fn noisy_round_trip() {
        let truth = FitParams { day: 0, a: 1.9790, b: 0.8990, c: 913.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let noisy: Vec<_> = parabola_curve(&truth, 360.0)
            .into_iter()
            .map(|(m, e)| {
                if e > 0.0 {
                    (m, e + 0.01 * truth.c * rng.random_range(-1.0..1.0))
                } else {
                    (m, e)
                }
            })
            .collect();
        let p = fit_parabola(0, &noisy, 360.0).unwrap();
        assert!(rel(p.a, truth.a) < 0.01);
        assert!(rel(p.b, truth.b) < 0.01);
        assert!(rel(p.c, truth.c) < 0.01);
    }

    #[test]
    fn zero_curve_insufficient() {
        let zeros: Vec<_> = (0..144).map(|i| (i as f64 * 10.0, 0.0)).collect();
        assert!(matches!(fit_parabola(4, &zeros, 360.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn convex_curve_degenerate() {
        let convex: Vec<_> = (30..110)
            .map(|i| {
                let m = i as f64 * 10.0;
                (m, 100.0 + 0.002 * (m - 700.0).powi(2))
            })
            .collect();
        assert!(matches!(fit_parabola(1, &convex, 360.0), Err(Error::DegenerateDay { day: 1, .. })));
    }

    #[test]
    fn bounds_examples() {
        let p = FitParams { day: 0, a: 2.0, b: 1.0, c: 1.0 };
        assert_eq!(daytime_bounds(&p, 360.0), (360.0, 1080.0));
        let p = FitParams { day: 0, a: 1.9790, b: 0.8990, c: 1.0 };
        let (lo, hi) = daytime_bounds(&p, 360.0);
        assert!((lo - 388.80).abs() < 1e-9 && (hi - 1036.08).abs() < 1e-9);
        let p = FitParams { day: 0, a: 2.0, b: 1e-12, c: 1.0 };
        let (lo, hi) = daytime_bounds(&p, 360.0);
        assert!((lo - 720.0).abs() < 1e-6 && (hi - 720.0).abs() < 1e-6);
    }

    #[test]
    fn normalize_examples() {
        let p = FitParams { day: 0, a: 2.0, b: 0.9, c: 800.0 };
        let m_c = 360.0;
        let v = normalize_point(m_c * p.a, p.c, &p, m_c);
        assert!(v.m_star.abs() < 1e-15 && v.e_star.abs() < 1e-15 && v.in_daytime);
        let n = normalize_point(m_c * (p.a + p.b), 0.0, &p, m_c);
        assert!((n.m_star - 1.0).abs() < 1e-12 && n.e_star == -1.0);
        let h = normalize_point(m_c * (p.a - p.b / 2.0), 0.75 * p.c, &p, m_c);
        assert!((h.m_star + 0.5).abs() < 1e-12 && (h.e_star + 0.25).abs() < 1e-12);
        assert!((h.e_star - master_curve(h.m_star)).abs() < 1e-12);
    }

    #[test]
    fn master_curve_values() {
        assert_eq!(master_curve(0.0), 0.0);
        assert_eq!(master_curve(1.0), -1.0);
        assert_eq!(master_curve(-1.0), -1.0);
        assert_eq!(master_curve(0.5), -0.25);
    }

    #[test]
    fn residual_examples() {
        let s = [
            NormalizedSample { m_star: 0.5, e_star: -0.25, in_daytime: true },
            NormalizedSample { m_star: 0.0, e_star: 0.1, in_daytime: true },
            NormalizedSample { m_star: 1.2, e_star: 0.3, in_daytime: false },
        ];
        let r = residuals(&s);
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].r_star, 0.0);
        assert_eq!(r[1].r_star, 0.1);
    }

    #[test]
    fn fit_params_csv_round_trip() {
        let ps = vec![FitParams { day: 3, a: 1.5, b: 0.75, c: 900.25 }];
        let mut buf = Vec::new();
        write_fit_params_csv(&mut buf, &ps).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("day,A,B,C\n"));
        assert_eq!(read_fit_params_csv(buf.as_slice()).unwrap(), ps);
    }

    fn params() -> impl Strategy<Value = FitParams> {
        (1.6f64..2.3, 0.6f64..1.1, 200.0f64..1200.0)
            .prop_filter("inside day", |(a, b, _)| 360.0 * (a - b) > 20.0 && 360.0 * (a + b) < 1420.0)
            .prop_map(|(a, b, c)| FitParams { day: 0, a, b, c })
    }

    proptest! {
        #[test]
        fn fit_round_trip(truth in params()) {
            let p = fit_parabola(0, &parabola_curve(&truth, 360.0), 360.0).unwrap();
            prop_assert!(rel(p.a, truth.a) < 1e-9);
            prop_assert!(rel(p.b, truth.b) < 1e-9);
            prop_assert!(rel(p.c, truth.c) < 1e-9);
            let (lo, hi) = daytime_bounds(&p, 360.0);
            prop_assert!(p.parabola(lo, 360.0).abs() <= 1e-9 * p.c);
            prop_assert!(p.parabola(hi, 360.0).abs() <= 1e-9 * p.c);
        }

        #[test]
        fn normalization_collapses(truth in params()) {
            let raw = DailySeries {
                day: 0,
                samples: (0..1440).step_by(10).map(|m| Sample {
                    minute: m,
                    irradiance: truth.parabola(m as f64, 360.0).max(0.0),
                }).collect(),
            };
            for s in normalize(&raw, &truth, 360.0).iter().filter(|s| s.in_daytime) {
                prop_assert!((s.e_star - master_curve(s.m_star)).abs() <= 1e-12);
            }
        }
    }
}
