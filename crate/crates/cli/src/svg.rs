//! Hand-emitted SVG charts. Every plot is built from data read back from the
//! files a command wrote, never from in-memory simulation state.

use std::fmt::Write as _;

pub const BLACK: &str = "#222222";
pub const BLUE: &str = "#1f77b4";
pub const ORANGE: &str = "#ff7f0e";
pub const GREEN: &str = "#2ca02c";
pub const RED: &str = "#d62728";
pub const GRAY: &str = "#9a9a9a";

const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        Self {
            label: label.into(),
            points,
            color,
            dashed: false,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }
}

/// Shapes in data coordinates, drawn beneath the series.
#[derive(Clone, Debug)]
pub enum Shape {
    Rect {
        min: (f64, f64),
        max: (f64, f64),
        fill: &'static str,
    },
    Circle {
        center: (f64, f64),
        radius: f64,
        fill: &'static str,
    },
    /// Fixed-size dots regardless of zoom.
    Dots {
        points: Vec<(f64, f64)>,
        color: &'static str,
        size: f64,
    },
    Marker {
        at: (f64, f64),
        label: String,
        color: &'static str,
    },
}

impl Shape {
    fn extent(&self) -> Vec<(f64, f64)> {
        match self {
            Shape::Rect { min, max, .. } => vec![*min, *max],
            Shape::Circle { center, radius, .. } => {
                vec![(center.0 - radius, center.1 - radius), (center.0 + radius, center.1 + radius)]
            }
            Shape::Dots { points, .. } => points.clone(),
            Shape::Marker { at, .. } => vec![*at],
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub shapes: Vec<Shape>,
    /// One data unit spans the same number of pixels on both axes.
    pub equal_aspect: bool,
}

impl Panel {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of(vals: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = vals
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if lo > hi {
            return Self { lo: -1.0, hi: 1.0 };
        }
        let span = hi - lo;
        if span < 1e-9 {
            let pad = (lo.abs() * 0.1).max(0.5);
            return Self {
                lo: lo - pad,
                hi: hi + pad,
            };
        }
        Self {
            lo: lo - 0.05 * span,
            hi: hi + 0.05 * span,
        }
    }

    fn span(&self) -> f64 {
        self.hi - self.lo
    }

    fn widen_to(&mut self, span: f64) {
        let mid = 0.5 * (self.lo + self.hi);
        self.lo = mid - 0.5 * span;
        self.hi = mid + 0.5 * span;
    }
}

/// Round tick positions covering `r`, about five of them.
fn ticks(r: Range) -> Vec<f64> {
    let raw = r.span() / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (r.lo / step).ceil() as i64;
    let last = (r.hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    let v = if v.abs() < 1e-12 { 0.0 } else { v };
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

struct Frame {
    x: Range,
    y: Range,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.left + (x - self.x.lo) / self.x.span() * self.w,
            self.top + (self.y.hi - y) / self.y.span() * self.h,
        )
    }

    fn scale(&self) -> f64 {
        self.w / self.x.span()
    }
}

fn draw_panel(out: &mut String, panel: &Panel, id: usize, top: f64, width: f64, height: f64) {
    let all: Vec<(f64, f64)> = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .chain(panel.shapes.iter().flat_map(Shape::extent))
        .collect();
    let mut x = Range::of(all.iter().map(|p| p.0));
    let mut y = Range::of(all.iter().map(|p| p.1));
    let w = width - MARGIN_LEFT - MARGIN_RIGHT;
    let h = height - MARGIN_TOP - MARGIN_BOTTOM;
    if panel.equal_aspect {
        let per_px = (x.span() / w).max(y.span() / h);
        x.widen_to(per_px * w);
        y.widen_to(per_px * h);
    }
    let f = Frame {
        x,
        y,
        left: MARGIN_LEFT,
        top: top + MARGIN_TOP,
        w,
        h,
    };

    let _ = writeln!(
        out,
        r#"<clipPath id="clip{id}"><rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/></clipPath>"#,
        f.left, f.top, f.w, f.h
    );
    let _ = writeln!(
        out,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#ffffff" stroke="#444444"/>"##,
        f.left, f.top, f.w, f.h
    );
    for t in ticks(f.x) {
        let (px, _) = f.px(t, f.y.lo);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#e4e4e4"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            f.top,
            f.top + f.h,
            f.top + f.h + 14.0,
            fmt_tick(t)
        );
    }
    for t in ticks(f.y) {
        let (_, py) = f.px(f.x.lo, t);
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#e4e4e4"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            f.left,
            f.left + f.w,
            f.left - 4.0,
            py + 4.0,
            fmt_tick(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-weight="bold">{}</text>"#,
        f.left + 0.5 * f.w,
        top + 18.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        f.left + 0.5 * f.w,
        f.top + f.h + 32.0,
        escape(&panel.x_label)
    );
    let (lx, ly) = (16.0, f.top + 0.5 * f.h);
    let _ = writeln!(
        out,
        r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
        escape(&panel.y_label)
    );

    let _ = writeln!(out, r#"<g clip-path="url(#clip{id})">"#);
    for s in &panel.shapes {
        draw_shape(out, &f, s);
    }
    for s in &panel.series {
        if s.points.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (k, (x, y)) in s.points.iter().enumerate() {
            let (px, py) = f.px(*x, *y);
            let _ = write!(d, "{}{px:.2} {py:.2}", if k == 0 { "M" } else { " L" });
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.6"{dash}/>"#,
            s.color
        );
    }
    let _ = writeln!(out, "</g>");

    let labelled: Vec<&Series> = panel.series.iter().filter(|s| !s.label.is_empty()).collect();
    for (k, s) in labelled.iter().enumerate() {
        let lx = f.left + f.w - 150.0;
        let ly = f.top + 14.0 + 16.0 * k as f64;
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 22.0,
            s.color,
            lx + 28.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
}

fn draw_shape(out: &mut String, f: &Frame, s: &Shape) {
    match s {
        Shape::Rect { min, max, fill } => {
            let (x0, y0) = f.px(min.0, max.1);
            let (x1, y1) = f.px(max.0, min.1);
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}" fill-opacity="0.6"/>"#,
                x1 - x0,
                y1 - y0
            );
        }
        Shape::Circle { center, radius, fill } => {
            let (cx, cy) = f.px(center.0, center.1);
            let _ = writeln!(
                out,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="{fill}" fill-opacity="0.6"/>"#,
                radius * f.scale()
            );
        }
        Shape::Dots { points, color, size } => {
            if points.is_empty() {
                return;
            }
            let mut d = String::new();
            for (x, y) in points {
                let (px, py) = f.px(*x, *y);
                let _ = write!(d, "M{px:.2} {py:.2}h0");
            }
            let _ = writeln!(
                out,
                r#"<path d="{d}" stroke="{color}" stroke-width="{size:.1}" stroke-linecap="round"/>"#
            );
        }
        Shape::Marker { at, label, color } => {
            let (px, py) = f.px(at.0, at.1);
            let _ = writeln!(
                out,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                px + 6.0,
                py - 6.0,
                escape(label)
            );
        }
    }
}

/// Panels stacked vertically in one document.
pub fn render(panels: &[Panel], width: f64, panel_height: f64) -> String {
    let height = panel_height * panels.len().max(1) as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    for (k, p) in panels.iter().enumerate() {
        draw_panel(&mut out, p, k, k as f64 * panel_height, width, panel_height);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_inside() {
        let t = ticks(Range { lo: -0.13, hi: 2.27 });
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        let t = ticks(Range { lo: 3.0, hi: 3.04 });
        assert!(t.iter().all(|v| (3.0..=3.04).contains(v)));
        assert!(!t.is_empty());
    }

    #[test]
    fn degenerate_range_is_padded() {
        let r = Range::of([2.0, 2.0].into_iter());
        assert!(r.lo < 2.0 && r.hi > 2.0);
        let r = Range::of(std::iter::empty());
        assert_eq!((r.lo, r.hi), (-1.0, 1.0));
    }

    #[test]
    fn equal_aspect_matches_pixel_scales() {
        let mut p = Panel::new("t", "x", "y");
        p.equal_aspect = true;
        p.series.push(Series::new("a", vec![(0.0, 0.0), (4.0, 1.0)], BLUE));
        let svg = render(&[p], 600.0, 400.0);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("stroke=\"#1f77b4\""));
    }

    #[test]
    fn text_is_escaped() {
        let p = Panel::new("a<b & c", "x", "y");
        let svg = render(&[p], 300.0, 200.0);
        assert!(svg.contains("a&lt;b &amp; c"));
    }

    #[test]
    fn output_is_deterministic() {
        let mk = || {
            let mut p = Panel::new("v", "t [s]", "v [m/s]");
            p.series
                .push(Series::new("v", vec![(0.0, 0.1), (0.02, 0.2), (0.04, 0.15)], BLACK).dashed());
            p.shapes.push(Shape::Dots {
                points: vec![(0.01, 0.12)],
                color: RED,
                size: 3.0,
            });
            render(&[p], 500.0, 300.0)
        };
        assert_eq!(mk(), mk());
    }
}
