//! Minimal static SVG charts: lines, heatmap, box-and-whisker, bars.

use std::fmt::Write;

const W: f64 = 800.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = span(xs);
        let (y0, y1) = span(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn span(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for k in 0..=4 {
        let xv = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let yv = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, f.px(xv), b + 16.0, tick(xv));
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, l - 6.0, f.py(yv) + 4.0, tick(yv));
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == 0.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.3}")
    }
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series<'_>]) -> String {
    let f = Frame::new(
        series.iter().flat_map(|s| s.points.iter().map(|p| p.0)),
        series.iter().flat_map(|s| s.points.iter().map(|p| p.1)),
    );
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#, pts.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{color}">{}</text>"#,
            W - RIGHT - 150.0,
            TOP + 16.0 * (k + 1) as f64,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Cells `(x, y, value)` on a regular lattice; colour scales with value.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, cells: &[(f64, f64, f64)]) -> String {
    let f = Frame::new(cells.iter().map(|c| c.0), cells.iter().map(|c| c.1));
    let step = |v: Vec<f64>| {
        let mut v = v;
        v.sort_by(f64::total_cmp);
        v.dedup();
        v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    };
    let dx = step(cells.iter().map(|c| c.0).collect());
    let dy = step(cells.iter().map(|c| c.1).collect());
    let vmax = cells.iter().map(|c| c.2).fold(0.0, f64::max);
    let mut out = String::new();
    open(&mut out, title);
    for &(x, y, v) in cells {
        if v <= 0.0 || !dx.is_finite() || !dy.is_finite() {
            continue;
        }
        let t = if vmax > 0.0 { v / vmax } else { 0.0 };
        let shade = (255.0 * (1.0 - t)).round() as u8;
        let (x0, x1) = (f.px(x - dx / 2.0), f.px(x + dx / 2.0));
        let (y0, y1) = (f.py(y + dy / 2.0), f.py(y - dy / 2.0));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="rgb({shade},{shade},255)"/>"#,
            (x1 - x0).max(0.5),
            (y1 - y0).max(0.5)
        );
    }
    axes(&mut out, &f, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

pub struct BoxRow {
    pub x: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub low: f64,
    pub high: f64,
    pub marker: Option<f64>,
}

pub fn box_chart(title: &str, xlabel: &str, ylabel: &str, rows: &[BoxRow]) -> String {
    let f = Frame::new(
        rows.iter().flat_map(|r| [r.x - 0.5, r.x + 0.5]),
        rows.iter().flat_map(|r| [r.low, r.high, r.marker.unwrap_or(r.median)]),
    );
    let half = ((W - LEFT - RIGHT) / (rows.len().max(1) as f64) * 0.35).max(0.5);
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for r in rows {
        let x = f.px(r.x);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" x2="{x:.2}" y1="{:.2}" y2="{:.2}" stroke="#555"/>"##,
            f.py(r.low),
            f.py(r.high)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#1f77b4"/>"##,
            x - half,
            f.py(r.q3),
            2.0 * half,
            (f.py(r.q1) - f.py(r.q3)).max(0.5)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" x2="{:.2}" y1="{:.2}" y2="{:.2}" stroke="black"/>"#,
            x - half,
            x + half,
            f.py(r.median),
            f.py(r.median)
        );
        if let Some(m) = r.marker {
            let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{:.2}" r="2" fill="#d62728"/>"##, f.py(m));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Bars `(left, right, height)` with an optional overlaid curve.
pub fn bar_chart(title: &str, xlabel: &str, ylabel: &str, bars: &[(f64, f64, f64)], curve: &[(f64, f64)]) -> String {
    let f = Frame::new(
        bars.iter().flat_map(|b| [b.0, b.1]),
        bars.iter().map(|b| b.2).chain(curve.iter().map(|c| c.1)).chain([0.0]),
    );
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for &(l, r, h) in bars {
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#c6dbef" stroke="#3182bd"/>"##,
            f.px(l),
            f.py(h),
            (f.px(r) - f.px(l)).max(0.5),
            f.py(0.0) - f.py(h)
        );
    }
    if !curve.is_empty() {
        let pts: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        let _ = writeln!(out, r##"<polyline fill="none" stroke="#d62728" stroke-width="1.5" points="{}"/>"##, pts.join(" "));
    }
    out.push_str("</svg>\n");
    out
}
