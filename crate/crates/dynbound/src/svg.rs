//! Minimal self-contained SVG plots on a fixed 800×600 canvas.

use std::fmt::Write;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
pub const MAX_POINTS: usize = 20_000;
const MARGIN: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    /// Connected polyline (trajectories).
    Line,
    /// Separate dots (section clouds).
    Dots,
}

/// Keeps at most [`MAX_POINTS`] points by uniform striding; the last point is
/// always kept.
pub fn decimate(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let stride = points.len().div_ceil(MAX_POINTS - 1);
    let mut out: Vec<(f64, f64)> = points.iter().step_by(stride).copied().collect();
    if out.len() < MAX_POINTS {
        out.push(*points.last().unwrap());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

pub fn bounds(points: &[(f64, f64)]) -> Bounds {
    let mut b = Bounds { x: (f64::INFINITY, f64::NEG_INFINITY), y: (f64::INFINITY, f64::NEG_INFINITY) };
    for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        b.x = (b.x.0.min(x), b.x.1.max(x));
        b.y = (b.y.0.min(y), b.y.1.max(y));
    }
    let widen = |(lo, hi): (f64, f64)| {
        if !lo.is_finite() {
            (-1.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    Bounds { x: widen(b.x), y: widen(b.y) }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plot with auto-scaled axes; `labels` are the horizontal and vertical axis names.
pub fn plot(points: &[(f64, f64)], labels: (&str, &str), title: &str, style: Style) -> String {
    let pts = decimate(points);
    let b = bounds(&pts);
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let sx = |x: f64| MARGIN + (x - b.x.0) / (b.x.1 - b.x.0) * pw;
    let sy = |y: f64| HEIGHT - MARGIN - (y - b.y.0) / (b.y.1 - b.y.0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<desc>bounds {:e} {:e} {:e} {:e}</desc>", b.x.0, b.x.1, b.y.0, b.y.1);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black" stroke-width="1"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let ticks =
        [(MARGIN, HEIGHT - MARGIN + 18.0, "start", b.x.0), (WIDTH - MARGIN, HEIGHT - MARGIN + 18.0, "end", b.x.1)];
    for (x, y, anchor, v) in ticks {
        let _ = writeln!(
            s,
            r#"<text x="{x}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{v:.4}</text>"#
        );
    }
    for (y, v) in [(HEIGHT - MARGIN, b.y.0), (MARGIN + 12.0, b.y.1)] {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="12" text-anchor="end">{v:.4}</text>"#,
            MARGIN - 6.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0,
        escape(labels.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(labels.1)
    );

    let mut coords = String::new();
    for &(x, y) in pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
        let _ = write!(coords, "{:.2},{:.2} ", sx(x), sy(y));
    }
    match style {
        Style::Line => {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="steelblue" stroke-width="0.6" points="{}"/>"#,
                coords.trim_end()
            );
        }
        Style::Dots => {
            let _ = writeln!(s, r#"<g fill="steelblue">"#);
            for p in coords.split_whitespace() {
                let (x, y) = p.split_once(',').unwrap();
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="1"/>"#);
            }
            let _ = writeln!(s, "</g>");
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Pixel coordinates of the points drawn by [`plot`].
pub fn plotted_pixels(svg: &str) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    if let Some(i) = svg.find("<polyline") {
        let rest = &svg[i..];
        let start = rest.find("points=\"").unwrap() + 8;
        let end = start + rest[start..].find('"').unwrap();
        for p in rest[start..end].split_whitespace() {
            let (x, y) = p.split_once(',').unwrap();
            out.push((x.parse().unwrap(), y.parse().unwrap()));
        }
    }
    for part in svg.split("<circle ").skip(1) {
        let get = |key: &str| -> f64 {
            let s = part.find(key).unwrap() + key.len();
            let e = s + part[s..].find('"').unwrap();
            part[s..e].parse().unwrap()
        };
        out.push((get("cx=\""), get("cy=\"")));
    }
    out
}

/// Points drawn by [`plot`] mapped back to data coordinates (to pixel
/// rounding).
pub fn plotted_data(svg: &str) -> Vec<(f64, f64)> {
    let s = svg.find("<desc>bounds ").unwrap() + 13;
    let e = s + svg[s..].find('<').unwrap();
    let v: Vec<f64> = svg[s..e].split_whitespace().map(|t| t.parse().unwrap()).collect();
    let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    plotted_pixels(svg)
        .into_iter()
        .map(|(px, py)| (v[0] + (px - MARGIN) / pw * (v[1] - v[0]), v[2] + (HEIGHT - MARGIN - py) / ph * (v[3] - v[2])))
        .collect()
}
