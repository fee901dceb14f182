//! Minimal SVG scatter plot: one point cloud per subset size.

use std::fmt::Write as _;

use super::format_sig6;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

pub fn scatter(title: &str, points: &[(u64, f64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<path d="M{x0} {y1} V{y0} H{x1}" fill="none" stroke="black"/>"#
    );
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }

    let (smin, smax) = points
        .iter()
        .fold((u64::MAX, 0), |(lo, hi), &(s, _)| (lo.min(s), hi.max(s)));
    let (vmin, vmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
    let pad = if vmax > vmin { 0.05 * (vmax - vmin) } else { vmin.abs().max(1.0) * 0.05 };
    let (vlo, vhi) = (vmin - pad, vmax + pad);
    let span = (smax - smin) as f64;
    let sx = |s: u64| {
        if span == 0.0 {
            (x0 + x1) / 2.0
        } else {
            x0 + 20.0 + (s - smin) as f64 / span * (x1 - x0 - 40.0)
        }
    };
    let sy = |v: f64| y0 - (v - vlo) / (vhi - vlo) * (y0 - y1);

    let mut sizes: Vec<u64> = points.iter().map(|p| p.0).collect();
    sizes.dedup();
    for s in sizes {
        let x = sx(s);
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{s}</text>"#,
            y0 + 18.0
        );
    }
    for i in 0..=4 {
        let v = vlo + (vhi - vlo) * i as f64 / 4.0;
        let y = sy(v);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 6.0,
            y + 4.0,
            format_sig6(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">subset size (lines)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    out.push_str(r#"<g fill="steelblue" fill-opacity="0.6">"#);
    out.push('\n');
    for &(s, v) in points {
        let _ = writeln!(out, r#"<circle cx="{:.1}" cy="{:.1}" r="2.5"/>"#, sx(s), sy(v));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
