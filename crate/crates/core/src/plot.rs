//! Static SVG scatter of S against hidden size, with the classical bound
//! and the Tsirelson bound drawn as the only two `<line>` elements.

use std::fmt::Write as _;

use crate::bell::{tsirelson_bound, CLASSICAL_BOUND};
use crate::contexts::SweepRow;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// One scatter point: hidden size, repeat index (for jitter), S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub n: usize,
    pub repeat: usize,
    pub s: f64,
}

pub fn points_from_rows(rows: &[SweepRow]) -> Vec<ScatterPoint> {
    rows.iter()
        .filter_map(|r| {
            r.s.map(|s| ScatterPoint {
                n: r.n,
                repeat: r.repeat,
                s,
            })
        })
        .collect()
}

pub fn scatter_svg(points: &[ScatterPoint], caption: Option<&str>) -> Result<String> {
    if points.is_empty() {
        return Err(Error::InvalidConfig("no data rows to plot".into()));
    }
    let mut ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    ns.sort_unstable();
    ns.dedup();

    let y_min = points.iter().map(|p| p.s).fold(0.0f64, f64::min).floor();
    let y_max = 4.0f64.max(
        points
            .iter()
            .map(|p| p.s)
            .fold(f64::NEG_INFINITY, f64::max)
            .ceil(),
    );
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let band = plot_w / ns.len() as f64;
    let x_of = |n: usize| MARGIN_LEFT + band * (ns.binary_search(&n).unwrap() as f64 + 0.5);
    let y_of = |s: f64| MARGIN_TOP + plot_h * (y_max - s) / (y_max - y_min);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(c) = caption {
        let _ = writeln!(svg, "<!-- {} -->", c.replace("--", "- -"));
    }
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );

    // Axes.
    let (x0, x1, y0, y1) = (
        MARGIN_LEFT,
        WIDTH - MARGIN_RIGHT,
        MARGIN_TOP,
        HEIGHT - MARGIN_BOTTOM,
    );
    let _ = writeln!(
        svg,
        r#"<path class="axes" d="M{x0},{y0} V{y1} H{x1}" fill="none" stroke="black"/>"#
    );
    let mut tick = y_min;
    while tick <= y_max + 1e-9 {
        let y = y_of(tick);
        let _ = writeln!(
            svg,
            r#"<path d="M{},{y:.2} H{x0}" stroke="black"/>"#,
            x0 - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{tick}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
        tick += 1.0;
    }
    for &n in &ns {
        let x = x_of(n);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{n}</text>"#,
            y1 + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">hidden units n</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">S</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // Reference lines.
    let yc = y_of(CLASSICAL_BOUND);
    let yt = y_of(tsirelson_bound());
    let _ = writeln!(
        svg,
        r#"<line class="ref-classical" x1="{x0}" y1="{yc:.2}" x2="{x1}" y2="{yc:.2}" stroke="red" stroke-dasharray="6,4"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<line class="ref-tsirelson" x1="{x0}" y1="{yt:.2}" x2="{x1}" y2="{yt:.2}" stroke="blue" stroke-dasharray="8,3,2,3"/>"#
    );

    // Points, jittered deterministically by repeat index.
    let spread = (band * 0.35).min(40.0);
    for p in points {
        let jitter = ((p.repeat * 37) % 101) as f64 / 100.0 - 0.5;
        let x = x_of(p.n) + jitter * spread;
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{:.2}" r="3" fill="black" fill-opacity="0.45"><title>n={} repeat={} S={}</title></circle>"#,
            y_of(p.s),
            p.n,
            p.repeat,
            p.s
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
