//! Minimal deterministic SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT_NO_AXIS: f64 = 150.0;
const RIGHT_AXIS: f64 = 210.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#2ca02c", "#d62728", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Axis {
    #[default]
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub axis: Axis,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Label of the right-hand axis; only drawn if some series uses it.
    pub y2_label: String,
    pub series: Vec<Series>,
    /// Highlighted points in left-axis coordinates.
    pub markers: Vec<(f64, f64)>,
}

impl PlotSpec {
    pub fn validate(&self) -> Result<()> {
        if self.series.is_empty() {
            return Err(Error::invalid("plot needs at least one series"));
        }
        for s in &self.series {
            if s.x.len() != s.y.len() {
                return Err(Error::DimensionMismatch { expected: s.x.len(), got: s.y.len() });
            }
            if s.x.is_empty() {
                return Err(Error::invalid(format!("series `{}` is empty", s.label)));
            }
            if let Some((index, &value)) = s.x.iter().chain(&s.y).enumerate().find(|(_, v)| !v.is_finite()) {
                return Err(Error::InvalidValue { index, value });
            }
        }
        if let Some(&(x, y)) = self.markers.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid(format!("non-finite marker ({x}, {y})")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let f = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    f * mag
}

/// Expands `[lo, hi]` to tick multiples and returns the ticks.
fn ticks(lo: f64, hi: f64) -> (f64, f64, Vec<f64>) {
    let (mut lo, mut hi) = (lo, hi);
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        lo -= pad;
        hi += pad;
    }
    let step = nice_step(hi - lo, 6);
    let first = (lo / step).floor();
    let last = (hi / step).ceil();
    let ticks = (0..=(last - first) as i64).map(|i| (first + i as f64) * step).collect();
    (first * step, last * step, ticks)
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    let r = if r == 0.0 { 0.0 } else { r };
    if r.abs() >= 1e5 || (r != 0.0 && r.abs() < 1e-3) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn range<'a>(values: impl Iterator<Item = &'a f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, &v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Renders `spec` as a standalone SVG document. Identical specs give
/// identical bytes.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let dual = spec.series.iter().any(|s| s.axis == Axis::Right);
    let right = if dual { RIGHT_AXIS } else { RIGHT_NO_AXIS };
    let plot_right = WIDTH - right;
    let plot_bottom = HEIGHT - BOTTOM;

    let (xlo, xhi) = range(spec.series.iter().flat_map(|s| &s.x).chain(spec.markers.iter().map(|m| &m.0))).unwrap();
    let left_y = spec.series.iter().filter(|s| s.axis == Axis::Left).flat_map(|s| &s.y);
    let (ylo, yhi) = range(left_y.chain(spec.markers.iter().map(|m| &m.1))).unwrap_or((0.0, 1.0));
    let (xlo, xhi, xticks) = ticks(xlo, xhi);
    let (ylo, yhi, yticks) = ticks(ylo, yhi);
    let xs = Scale { lo: xlo, hi: xhi, px_lo: LEFT, px_hi: plot_right };
    let ys = Scale { lo: ylo, hi: yhi, px_lo: plot_bottom, px_hi: TOP };
    let y2 = if dual {
        let (lo, hi) =
            range(spec.series.iter().filter(|s| s.axis == Axis::Right).flat_map(|s| &s.y)).unwrap();
        let (lo, hi, t) = ticks(lo, hi);
        Some((Scale { lo, hi, px_lo: plot_bottom, px_hi: TOP }, t))
    } else {
        None
    };

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    if !spec.title.is_empty() {
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            (LEFT + plot_right) / 2.0,
            escape(&spec.title)
        );
    }
    let _ = writeln!(
        w,
        r##"<rect x="{LEFT}" y="{TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##,
        plot_right - LEFT,
        plot_bottom - TOP
    );
    for t in &xticks {
        let px = xs.map(*t);
        let _ = writeln!(
            w,
            r##"<path d="M{px:.2} {plot_bottom:.2}V{:.2}" stroke="#333"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            plot_bottom + 5.0,
            plot_bottom + 18.0,
            fmt_tick(*t)
        );
    }
    for t in &yticks {
        let py = ys.map(*t);
        let _ = writeln!(
            w,
            r##"<path d="M{:.2} {py:.2}H{LEFT:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            fmt_tick(*t)
        );
    }
    if let Some((s2, t2)) = &y2 {
        for t in t2 {
            let py = s2.map(*t);
            let _ = writeln!(
                w,
                r##"<path d="M{plot_right:.2} {py:.2}H{:.2}" stroke="#333"/><text x="{:.2}" y="{:.2}">{}</text>"##,
                plot_right + 5.0,
                plot_right + 8.0,
                py + 4.0,
                fmt_tick(*t)
            );
        }
        let cx = plot_right + 48.0;
        let cy = (TOP + plot_bottom) / 2.0;
        let _ = writeln!(
            w,
            r#"<text x="{cx:.2}" y="{cy:.2}" text-anchor="middle" transform="rotate(90 {cx:.2} {cy:.2})">{}</text>"#,
            escape(&spec.y2_label)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + plot_right) / 2.0,
        HEIGHT - 15.0,
        escape(&spec.x_label)
    );
    let cy = (TOP + plot_bottom) / 2.0;
    let _ = writeln!(
        w,
        r#"<text x="18" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 18 {cy:.2})">{}</text>"#,
        escape(&spec.y_label)
    );

    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let sy = match (&y2, s.axis) {
            (Some((s2, _)), Axis::Right) => *s2,
            _ => ys,
        };
        let pts: Vec<String> =
            s.x.iter().zip(&s.y).map(|(x, y)| format!("{:.2},{:.2}", xs.map(*x), sy.map(*y))).collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            w,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            pts.join(" ")
        );
    }
    for (x, y) in &spec.markers {
        let _ = writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#, xs.map(*x), ys.map(*y));
    }

    let lx = plot_right + if dual { 70.0 } else { 12.0 };
    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_svg(spec: &PlotSpec, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, render_svg(spec)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> PlotSpec {
        PlotSpec {
            title: "a < b".into(),
            x_label: "B".into(),
            y_label: "error".into(),
            series: vec![Series::new("s", vec![2.0, 3.0, 4.0], vec![5.0, 1.0, 3.0])],
            markers: vec![(3.0, 1.0)],
            ..Default::default()
        }
    }

    #[test]
    fn one_polyline_per_series_and_one_circle_per_marker() {
        let svg = render_svg(&spec()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn marker_lands_on_the_mapped_point() {
        let svg = render_svg(&spec()).unwrap();
        // x ticks span [2, 4] over px [70, 490]; y ticks span [1, 5] over px [365, 40].
        assert!(svg.contains(r#"<circle cx="280.00" cy="365.00""#), "{svg}");
        assert!(svg.contains("70.00,40.00 280.00,365.00 490.00,202.50"));
    }

    #[test]
    fn deterministic_bytes() {
        assert_eq!(render_svg(&spec()).unwrap(), render_svg(&spec()).unwrap());
    }

    #[test]
    fn dual_axis_and_degenerate_ranges() {
        let mut s = spec();
        s.series.push(Series { axis: Axis::Right, dashed: true, ..Series::new("r", vec![2.0, 4.0], vec![7.0, 7.0]) });
        s.y2_label = "bits".into();
        let svg = render_svg(&s).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains(">bits</text>"));
        let single = PlotSpec { series: vec![Series::new("p", vec![5.0], vec![2.0])], ..Default::default() };
        assert!(render_svg(&single).is_ok());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(render_svg(&PlotSpec::default()).is_err());
        let mut s = spec();
        s.series[0].y.pop();
        assert!(render_svg(&s).is_err());
        let mut s = spec();
        s.series[0].y[0] = f64::NAN;
        assert!(render_svg(&s).is_err());
    }
}
