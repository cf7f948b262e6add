//! Irradiance to photovoltaic current through a five-parameter single-diode
//! model:
//!
//! `I = I_ph·g/1000 − I₀·[exp((V + I·R_s)/a) − 1] − (V + I·R_s)/R_sh`,
//! `a = n·N_cells·k·T/q`.
//!
//! Extraction fixes `n` and solves `I_ph`, `I₀`, `R_s`, `R_sh` from the
//! short-circuit, open-circuit and maximum-power anchors of a datasheet.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

const BOLTZMANN: f64 = 1.380_649e-23;
const CHARGE: f64 = 1.602_176_634e-19;
pub const T_REF_K: f64 = 298.15;
pub const G_REF: f64 = 1000.0;
pub const DEFAULT_IDEALITY: f64 = 1.3;
/// Silicon band gap, eV.
const BAND_GAP_EV: f64 = 1.121;

pub fn thermal_voltage(t_kelvin: f64) -> f64 {
    BOLTZMANN * t_kelvin / CHARGE
}

/// Datasheet values of one module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub stc_power_w: f64,
    pub ptc_power_w: f64,
    pub noct_c: f64,
    pub power_per_area: f64,
    pub peak_efficiency: f64,
    pub n_cells: u32,
    pub i_mp_a: f64,
    pub v_mp_v: f64,
    pub i_sc_a: f64,
    pub v_oc_v: f64,
}

impl PanelSpec {
    /// Solartec S60PC-250.
    pub fn s60pc_250() -> Self {
        Self {
            stc_power_w: 250.0,
            ptc_power_w: 226.47,
            noct_c: 45.0,
            power_per_area: 153.7,
            peak_efficiency: 15.39,
            n_cells: 60,
            i_mp_a: 8.17,
            v_mp_v: 30.60,
            i_sc_a: 8.71,
            v_oc_v: 36.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.stc_power_w, self.i_mp_a, self.v_mp_v, self.i_sc_a, self.v_oc_v];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) || self.n_cells == 0 {
            return Err(Error::InvalidInput("panel ratings must be positive".into()));
        }
        if self.i_mp_a >= self.i_sc_a {
            return Err(Error::InvalidInput(format!("i_mp {} must be below i_sc {}", self.i_mp_a, self.i_sc_a)));
        }
        if self.v_mp_v >= self.v_oc_v {
            return Err(Error::InvalidInput(format!("v_mp {} must be below v_oc {}", self.v_mp_v, self.v_oc_v)));
        }
        if self.i_mp_a * self.v_mp_v > self.stc_power_w * 1.01 {
            return Err(Error::InvalidInput(format!(
                "i_mp·v_mp = {:.2} W exceeds rated {} W",
                self.i_mp_a * self.v_mp_v,
                self.stc_power_w
            )));
        }
        Ok(())
    }
}

impl Default for PanelSpec {
    fn default() -> Self {
        Self::s60pc_250()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiodeModel {
    /// Photocurrent at 1000 W/m².
    pub i_ph_ref: f64,
    pub i_0: f64,
    pub n: f64,
    pub r_s: f64,
    pub r_sh: f64,
    pub n_cells: u32,
    /// Cell temperature of the reference conditions, K.
    pub t_ref_k: f64,
}

/// Diode model at a given operating temperature.
#[derive(Debug, Clone, Copy)]
struct Operating {
    i_0: f64,
    a: f64,
}

impl DiodeModel {
    fn operating(&self, t_cell_k: f64) -> Operating {
        let a = self.n * self.n_cells as f64 * thermal_voltage(t_cell_k);
        let ratio = t_cell_k / self.t_ref_k;
        let i_0 = self.i_0
            * ratio.powi(3)
            * ((BAND_GAP_EV / (self.n * BOLTZMANN / CHARGE)) * (1.0 / self.t_ref_k - 1.0 / t_cell_k)).exp();
        Operating { i_0, a }
    }

    /// `f(I) = I_ph − I₀[exp((V+IR_s)/a) − 1] − (V+IR_s)/R_sh − I`.
    fn residual(&self, op: Operating, i_ph: f64, v: f64, i: f64) -> (f64, f64) {
        let vd = v + i * self.r_s;
        let e = (vd / op.a).exp();
        let f = i_ph - op.i_0 * (e - 1.0) - vd / self.r_sh - i;
        let df = -op.i_0 * e * self.r_s / op.a - self.r_s / self.r_sh - 1.0;
        (f, df)
    }
}

fn thermal_a(n: f64, cells: u32) -> f64 {
    n * cells as f64 * thermal_voltage(T_REF_K)
}

/// `I_ph`, `I₀` from the short- and open-circuit equations for given `R_s`, `R_sh`.
fn linear_part(spec: &PanelSpec, a: f64, r_s: f64, r_sh: f64) -> Option<(f64, f64)> {
    let e1 = (spec.i_sc_a * r_s / a).exp_m1();
    let e2 = (spec.v_oc_v / a).exp_m1();
    let b1 = spec.i_sc_a * (1.0 + r_s / r_sh);
    let b2 = spec.v_oc_v / r_sh;
    // [1 −e1; 1 −e2]·(I_ph, I₀) = (b1, b2)
    let det = e1 - e2;
    if det == 0.0 {
        return None;
    }
    let i_0 = (b1 - b2) / (e2 - e1);
    let i_ph = b1 + i_0 * e1;
    Some((i_ph, i_0))
}

/// Maximum-power residuals: the point lies on the curve and `dP/dV = 0`.
fn mpp_residuals(spec: &PanelSpec, a: f64, r_s: f64, r_sh: f64) -> Option<[f64; 2]> {
    let (i_ph, i_0) = linear_part(spec, a, r_s, r_sh)?;
    let vd = spec.v_mp_v + spec.i_mp_a * r_s;
    let f3 = i_ph - i_0 * (vd / a).exp_m1() - vd / r_sh - spec.i_mp_a;
    let g = i_0 / a * (vd / a).exp() + 1.0 / r_sh;
    let f4 = g * spec.v_mp_v - spec.i_mp_a * (1.0 + r_s * g);
    let r = [f3, f4 / spec.v_mp_v];
    r.iter().all(|x| x.is_finite()).then_some(r)
}

fn extract_with_ideality(spec: &PanelSpec, n: f64) -> Option<DiodeModel> {
    let a = thermal_a(n, spec.n_cells);
    // unknowns: R_s and ln R_sh
    let mut x = [0.1 * (spec.v_oc_v - spec.v_mp_v) / spec.i_mp_a, (100.0 * spec.v_oc_v / spec.i_sc_a).ln()];
    let eval = |x: &[f64; 2]| mpp_residuals(spec, a, x[0], x[1].exp());
    let norm = |r: &[f64; 2]| r[0].hypot(r[1]);
    let mut r = eval(&x)?;
    for _ in 0..200 {
        if norm(&r) < 1e-13 {
            break;
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let step = 1e-7 * x[k].abs().max(1e-3);
            let mut xp = x;
            xp[k] += step;
            let rp = eval(&xp)?;
            for i in 0..2 {
                jac[i][k] = (rp[i] - r[i]) / step;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut lambda = 1.0;
        loop {
            let xn = [x[0] + lambda * dx[0], x[1] + lambda * dx[1]];
            if xn[0] > 0.0 {
                if let Some(rn) = eval(&xn) {
                    if norm(&rn) < norm(&r) {
                        x = xn;
                        r = rn;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return None;
            }
        }
    }
    if norm(&r) > 1e-9 {
        return None;
    }
    let (r_s, r_sh) = (x[0], x[1].exp());
    let (i_ph, i_0) = linear_part(spec, a, r_s, r_sh)?;
    (i_ph > 0.0 && i_0 > 0.0 && r_s > 0.0 && r_sh > 0.0).then_some(DiodeModel {
        i_ph_ref: i_ph,
        i_0,
        n,
        r_s,
        r_sh,
        n_cells: spec.n_cells,
        t_ref_k: T_REF_K,
    })
}

/// Solves the datasheet anchors at 1000 W/m² and 25 °C. The ideality factor
/// starts at 1.3; if no physical solution exists it is lowered in 0.05 steps.
pub fn extract_diode_model(spec: &PanelSpec) -> Result<DiodeModel> {
    spec.validate()?;
    let mut n = DEFAULT_IDEALITY;
    while n >= 0.999 {
        if let Some(m) = extract_with_ideality(spec, n) {
            if n != DEFAULT_IDEALITY {
                warn!("diode extraction used ideality factor {n:.2}");
            }
            check_anchors(spec, &m)?;
            return Ok(m);
        }
        n -= 0.05;
    }
    Err(Error::Extraction("maximum-power anchor not reachable for ideality in [1.0, 1.3]".into()))
}

fn check_anchors(spec: &PanelSpec, m: &DiodeModel) -> Result<()> {
    let isc = iv_current(0.0, G_REF, m)?;
    if (isc - spec.i_sc_a).abs() > 1e-3 * spec.i_sc_a {
        return Err(Error::Extraction(format!("short-circuit current {isc} vs {}", spec.i_sc_a)));
    }
    let ioc = iv_current(spec.v_oc_v, G_REF, m)?;
    if ioc.abs() > 1e-3 * spec.i_sc_a {
        return Err(Error::Extraction(format!("open-circuit current {ioc}")));
    }
    let p = mpp(G_REF, m)?;
    if (p.v - spec.v_mp_v).abs() > 1e-2 * spec.v_mp_v || (p.i - spec.i_mp_a).abs() > 1e-2 * spec.i_mp_a {
        return Err(Error::Extraction(format!(
            "maximum-power point ({:.3} V, {:.3} A) vs ({}, {})",
            p.v, p.i, spec.v_mp_v, spec.i_mp_a
        )));
    }
    Ok(())
}

/// Panel current at terminal voltage `v` and irradiance `g`, 25 °C.
pub fn iv_current(v: f64, g: f64, model: &DiodeModel) -> Result<f64> {
    iv_current_at(v, g, model, model.t_ref_k)
}

/// Root of the implicit diode equation, by damped Newton with a bisection
/// fallback on a bracket where the residual changes sign.
pub fn iv_current_at(v: f64, g: f64, model: &DiodeModel, t_cell_k: f64) -> Result<f64> {
    if !(g >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidInput(format!("iv_current at v = {v}, g = {g}")));
    }
    let op = model.operating(t_cell_k);
    let i_ph = model.i_ph_ref * g / G_REF;
    // f is strictly decreasing in I.
    let f = |i: f64| model.residual(op, i_ph, v, i);
    let mut hi = i_ph + 1.0;
    let mut lo = -1.0_f64;
    let mut k = 0;
    while f(lo).0 < 0.0 {
        lo *= 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::Numeric(format!("no lower bracket at v = {v}")));
        }
    }
    while f(hi).0 > 0.0 {
        hi = hi * 2.0 + 1.0;
    }
    let mut i = (i_ph - v / model.r_sh).clamp(lo, hi);
    for _ in 0..100 {
        let (fi, dfi) = f(i);
        if fi.abs() <= 1e-12 {
            return Ok(i);
        }
        if fi > 0.0 {
            lo = i;
        } else {
            hi = i;
        }
        let mut next = i - fi / dfi;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        i = next;
        if hi - lo < 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    let fi = f(i).0;
    if fi.abs() <= 1e-9 {
        Ok(i)
    } else {
        Err(Error::Numeric(format!("diode equation residual {fi:e} at v = {v}, g = {g}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub v: f64,
    pub i: f64,
    pub p: f64,
}

/// Maximum of `V·I(V)` on `[0, V_oc(g)]` by golden-section search.
pub fn mpp(g: f64, model: &DiodeModel) -> Result<OperatingPoint> {
    mpp_at(g, model, model.t_ref_k)
}

pub fn mpp_at(g: f64, model: &DiodeModel, t_cell_k: f64) -> Result<OperatingPoint> {
    if !(g > 0.0) {
        return Ok(OperatingPoint { v: 0.0, i: 0.0, p: 0.0 });
    }
    let power = |v: f64| iv_current_at(v, g, model, t_cell_k).map(|i| v * i);
    // open-circuit voltage: first zero of I(V)
    let mut lo = 0.0;
    let mut hi = model.n_cells as f64;
    while iv_current_at(hi, g, model, t_cell_k)? > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if iv_current_at(mid, g, model, t_cell_k)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut pc, mut pd) = (power(c)?, power(d)?);
    while b - a > 1e-9 * hi {
        if pc > pd {
            b = d;
            d = c;
            pd = pc;
            c = b - phi * (b - a);
            pc = power(c)?;
        } else {
            a = c;
            c = d;
            pc = pd;
            d = a + phi * (b - a);
            pd = power(d)?;
        }
    }
    let v = 0.5 * (a + b);
    let i = iv_current_at(v, g, model, t_cell_k)?;
    Ok(OperatingPoint { v, i, p: v * i })
}

/// Cell temperature from the nominal operating cell temperature rule.
pub fn noct_cell_temperature_c(ambient_c: f64, g: f64, noct_c: f64) -> f64 {
    ambient_c + (noct_c - 20.0) / 800.0 * g
}

/// Panels in series. The string current equals one panel's current and its
/// voltage is `series` times the panel voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub series: u32,
    pub panel: PanelSpec,
    /// When set, cell temperature follows the NOCT rule at this ambient
    /// temperature instead of the fixed 25 °C.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_c: Option<f64>,
}

impl Default for ArraySpec {
    fn default() -> Self {
        Self { series: 8, panel: PanelSpec::s60pc_250(), ambient_c: None }
    }
}

/// Irradiance-to-current converter for one array.
#[derive(Debug, Clone)]
pub struct PvArray {
    pub spec: ArraySpec,
    pub model: DiodeModel,
}

impl PvArray {
    pub fn new(spec: ArraySpec) -> Result<Self> {
        if spec.series == 0 {
            return Err(Error::InvalidInput("array needs at least one panel".into()));
        }
        let model = extract_diode_model(&spec.panel)?;
        Ok(Self { spec, model })
    }

    fn cell_temperature_k(&self, g: f64) -> f64 {
        match self.spec.ambient_c {
            Some(t) => noct_cell_temperature_c(t, g, self.spec.panel.noct_c) + 273.15,
            None => self.model.t_ref_k,
        }
    }

    /// String operating point at maximum power.
    pub fn mpp(&self, g: f64) -> Result<OperatingPoint> {
        let p = mpp_at(g, &self.model, self.cell_temperature_k(g))?;
        let s = self.spec.series as f64;
        Ok(OperatingPoint { v: p.v * s, i: p.i, p: p.p * s })
    }

    /// Maximum-power current tabulated every `step` W/m² up to `g_max`, for
    /// converting many curves.
    pub fn current_table(&self, g_max: f64, step: f64) -> Result<CurrentTable> {
        let n = (g_max / step).ceil() as usize + 1;
        let currents = (0..n).map(|k| self.mpp(k as f64 * step).map(|p| p.i)).collect::<Result<_>>()?;
        Ok(CurrentTable { step, currents })
    }
}

/// Linear interpolation of maximum-power current against irradiance.
#[derive(Debug, Clone)]
pub struct CurrentTable {
    step: f64,
    currents: Vec<f64>,
}

impl CurrentTable {
    pub fn current(&self, g: f64) -> f64 {
        if g <= 0.0 {
            return 0.0;
        }
        let pos = g / self.step;
        let k = (pos.floor() as usize).min(self.currents.len() - 2);
        let w = pos - k as f64;
        // beyond the table the current keeps its last slope
        self.currents[k] + w * (self.currents[k + 1] - self.currents[k])
    }
}

/// Time integral of a current profile `(minute, amps)`, in A·h.
pub fn charge_from_currents(currents: &[(f64, f64)]) -> f64 {
    let (m, i): (Vec<f64>, Vec<f64>) = currents.iter().copied().unzip();
    stats::trapezoid(&m, &i) / 60.0
}

/// Charge delivered over a day by an array operated at maximum power.
pub fn daily_charge(curve: &[(f64, f64)], array: &PvArray) -> Result<f64> {
    let currents = curve
        .iter()
        .map(|&(m, g)| array.mpp(g).map(|p| (m, p.i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(charge_from_currents(&currents))
}

pub fn daily_charge_tabulated(curve: &[(f64, f64)], table: &CurrentTable) -> f64 {
    let currents: Vec<(f64, f64)> = curve.iter().map(|&(m, g)| (m, table.current(g))).collect();
    charge_from_currents(&currents)
}

pub const MIN_REPLICATES: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeStatistics {
    pub day: u32,
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    /// Full data range.
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Values beyond 1.5·IQR from the box.
    pub outliers: Vec<f64>,
}

impl ChargeStatistics {
    pub fn in_box(&self, x: f64) -> bool {
        x >= self.q1 && x <= self.q3
    }
}

pub fn charge_statistics(day: u32, charges: &[f64]) -> Result<ChargeStatistics> {
    if charges.len() < MIN_REPLICATES {
        return Err(Error::Statistics(format!(
            "day {day}: {} replicates, at least {MIN_REPLICATES} needed",
            charges.len()
        )));
    }
    if charges.iter().any(|x| !x.is_finite()) {
        return Err(Error::Statistics(format!("day {day}: non-finite charge")));
    }
    let s = stats::sorted_copy(charges);
    let q1 = stats::quantile_sorted(&s, 0.25);
    let median = stats::quantile_sorted(&s, 0.5);
    let q3 = stats::quantile_sorted(&s, 0.75);
    let fence = 1.5 * (q3 - q1);
    let outliers = s.iter().copied().filter(|&x| x < q1 - fence || x > q3 + fence).collect();
    Ok(ChargeStatistics {
        day,
        n: s.len(),
        q1,
        median,
        q3,
        whisker_low: s[0],
        whisker_high: s[s.len() - 1],
        outliers,
    })
}

pub fn write_statistics_csv<W: std::io::Write>(out: W, rows: &[ChargeStatistics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "q1", "median", "q3", "whisker_low", "whisker_high", "n_outliers"])?;
    for r in rows {
        w.write_record([
            r.day.to_string(),
            format!("{:.6}", r.q1),
            format!("{:.6}", r.median),
            format!("{:.6}", r.q3),
            format!("{:.6}", r.whisker_low),
            format!("{:.6}", r.whisker_high),
            r.outliers.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `day,charge_ah` rows.
pub fn read_charges_csv<R: std::io::Read>(src: R) -> Result<Vec<(u32, f64)>> {
    let mut r = csv::Reader::from_reader(src);
    let headers: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if headers != ["day", "charge_ah"] {
        return Err(Error::InvalidInput(format!("charge file header {headers:?}, expected day,charge_ah")));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let day = rec[0].trim().parse().map_err(|e| Error::InvalidInput(format!("day `{}`: {e}", &rec[0])))?;
        let q: f64 = rec[1].trim().parse().map_err(|e| Error::InvalidInput(format!("charge `{}`: {e}", &rec[1])))?;
        out.push((day, q));
    }
    Ok(out)
}

pub fn write_charges_csv<W: std::io::Write>(out: W, rows: &[(u32, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["day", "charge_ah"])?;
    for (d, q) in rows {
        w.write_record([d.to_string(), format!("{q:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model() -> DiodeModel {
        extract_diode_model(&PanelSpec::s60pc_250()).unwrap()
    }

    #[test]
    fn extraction_matches_independent_solution() {
        // Solved separately with a generic root finder on the same four anchors.
        let m = model();
        assert_eq!(m.n, 1.3);
        assert!((m.r_s - 0.014301018).abs() < 1e-6, "{}", m.r_s);
        assert!((m.r_sh / 9896.477 - 1.0).abs() < 1e-4, "{}", m.r_sh);
        assert!((m.i_0 / 1.18360705e-7 - 1.0).abs() < 1e-4, "{}", m.i_0);
        assert!((m.i_ph_ref - 8.71001259).abs() < 1e-6);
    }

    #[test]
    fn anchors_reproduced() {
        let m = model();
        assert!((iv_current(0.0, 1000.0, &m).unwrap() - 8.71).abs() <= 8.71e-3);
        assert!(iv_current(36.3, 1000.0, &m).unwrap().abs() <= 8.71e-3);
        let p = mpp(1000.0, &m).unwrap();
        assert!((p.p - 250.0).abs() <= 5.0, "{}", p.p);
        assert!((p.v - 30.6).abs() < 0.306 && (p.i - 8.17).abs() < 0.0817);
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut s = PanelSpec::s60pc_250();
        s.i_mp_a = 9.0;
        assert!(matches!(extract_diode_model(&s), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn dark_current() {
        let m = model();
        assert!(iv_current(0.0, 0.0, &m).unwrap().abs() < 1e-12);
        for v in [1.0, 10.0, 30.0, 36.0] {
            assert!(iv_current(v, 0.0, &m).unwrap() <= 0.0);
        }
        assert!(iv_current(1.0, -1.0, &m).is_err());
    }

    #[test]
    fn half_sun_power() {
        let m = model();
        let p = mpp(500.0, &m).unwrap().p;
        assert!(p > 0.40 * 250.0 && p < 0.55 * 250.0, "{p}");
    }

    #[test]
    fn mpp_beats_fine_grid() {
        let m = model();
        for g in [100.0, 500.0, 1000.0] {
            let best = (0..=10_000)
                .map(|k| {
                    let v = 36.3 * 1.05 * k as f64 / 10_000.0;
                    v * iv_current(v, g, &m).unwrap()
                })
                .fold(f64::MIN, f64::max);
            let p = mpp(g, &m).unwrap().p;
            assert!(p >= best * (1.0 - 1e-3) && p <= best * (1.0 + 1e-3), "{g}: {p} vs {best}");
        }
    }

    #[test]
    fn power_monotone_in_irradiance() {
        let m = model();
        let mut last = 0.0;
        for g in (50..=1000).step_by(25) {
            let p = mpp(g as f64, &m).unwrap().p;
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn power_curve_unimodal() {
        let m = model();
        let ps: Vec<f64> = (0..=10_000).map(|k| {
            let v = 36.3 * k as f64 / 10_000.0;
            v * iv_current(v, 1000.0, &m).unwrap()
        }).collect();
        let changes = ps
            .windows(3)
            .filter(|w| (w[1] - w[0]).signum() != (w[2] - w[1]).signum())
            .count();
        assert_eq!(changes, 1);
    }

    #[test]
    fn low_irradiance_linearity() {
        let m = model();
        for g in [25.0, 50.0, 100.0] {
            let ratio = mpp(2.0 * g, &m).unwrap().i / mpp(g, &m).unwrap().i;
            assert!((ratio - 2.0).abs() < 0.1, "{g}: {ratio}");
        }
    }

    #[test]
    fn one_hour_at_stc() {
        let array = PvArray::new(ArraySpec::default()).unwrap();
        let curve: Vec<_> = (0..=60).map(|m| (m as f64, 1000.0)).collect();
        let q = daily_charge(&curve, &array).unwrap();
        assert!((q - 8.17).abs() < 0.02 * 8.17, "{q}");
        let two: Vec<_> = (0..=120).map(|m| (m as f64, 1000.0)).collect();
        assert!((daily_charge(&two, &array).unwrap() - 2.0 * q).abs() < 1e-9);
        let zero: Vec<_> = (0..=60).map(|m| (m as f64, 0.0)).collect();
        assert_eq!(daily_charge(&zero, &array).unwrap(), 0.0);
        assert!((array.mpp(1000.0).unwrap().p - 8.0 * mpp(1000.0, &array.model).unwrap().p).abs() < 1e-9);
    }

    #[test]
    fn table_matches_direct() {
        let array = PvArray::new(ArraySpec::default()).unwrap();
        let t = array.current_table(1500.0, 1.0).unwrap();
        for g in [0.0, 3.3, 250.7, 999.9, 1400.2] {
            let direct = array.mpp(g).unwrap().i;
            assert!((t.current(g) - direct).abs() < 1e-4, "{g}");
        }
    }

    #[test]
    fn hot_cells_lose_voltage() {
        let mut spec = ArraySpec::default();
        spec.ambient_c = Some(30.0);
        let hot = PvArray::new(spec).unwrap();
        let cold = PvArray::new(ArraySpec::default()).unwrap();
        assert!(hot.mpp(1000.0).unwrap().v < cold.mpp(1000.0).unwrap().v);
        assert_eq!(noct_cell_temperature_c(20.0, 800.0, 45.0), 45.0);
    }

    #[test]
    fn statistics_examples() {
        let s = charge_statistics(1, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.q1, s.median, s.q3), (2.0, 3.0, 4.0));
        assert!(s.outliers.is_empty());
        let s = charge_statistics(1, &[7.0; 6]).unwrap();
        assert_eq!(s.q3 - s.q1, 0.0);
        assert!(s.outliers.is_empty());
        let s = charge_statistics(1, &[2.9, 3.0, 3.0, 3.1, 30.0]).unwrap();
        assert_eq!(s.outliers, vec![30.0]);
        assert_eq!(s.whisker_high, 30.0);
        assert!(charge_statistics(1, &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn charges_csv_round_trip() {
        let rows = vec![(0, 12.5), (1, 40.25)];
        let mut buf = Vec::new();
        write_charges_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_charges_csv(buf.as_slice()).unwrap(), rows);
    }

    proptest! {
        #[test]
        fn statistics_ordered(xs in prop::collection::vec(-1e3f64..1e3, 4..60)) {
            let s = charge_statistics(0, &xs).unwrap();
            prop_assert!(s.whisker_low <= s.q1 && s.q1 <= s.median && s.median <= s.q3 && s.q3 <= s.whisker_high);
        }

        #[test]
        fn root_residual_small(v in 0.0f64..40.0, g in 0.0f64..1300.0) {
            let m = model();
            let i = iv_current(v, g, &m).unwrap();
            let op = m.operating(m.t_ref_k);
            let (f, _) = m.residual(op, m.i_ph_ref * g / G_REF, v, i);
            prop_assert!(f.abs() <= 1e-9);
        }
    }
}
