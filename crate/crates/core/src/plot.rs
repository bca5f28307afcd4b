//! Static SVG constellation scatter plots.
//!
//! Ideal points are drawn as crosses (`<path class="ideal">`) and received
//! samples as dots (`<circle class="sample">`), one element per marker.

use std::fmt::Write as _;

use crate::units::IqSample;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn constellation_svg(ideal: &[IqSample], samples: &[IqSample], title: &str) -> String {
    let peak = |pts: &[IqSample]| pts.iter().map(|p| p.i.abs().max(p.q.abs())).fold(0.0, f64::max);
    let ideal_peak = peak(ideal);
    let mut extent = ideal_peak * 1.5;
    if ideal_peak > 0.0 {
        // outliers at very low SNR would otherwise shrink the lattice to a dot
        extent = extent.max(peak(samples).min(ideal_peak * 3.0));
    } else {
        extent = peak(samples);
    }
    if !(extent > 0.0) {
        extent = 1.0;
    }
    let plot = SIZE - 2.0 * MARGIN;
    let x = |i: f64| MARGIN + (i + extent) / (2.0 * extent) * plot;
    let y = |q: f64| MARGIN + (extent - q) / (2.0 * extent) * plot;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        MARGIN / 2.0 + 5.0,
        escape(title)
    );
    let (x0, y0) = (x(0.0), y(0.0));
    let _ = writeln!(
        svg,
        r##"<line class="axis" x1="{MARGIN}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#999" stroke-width="1"/>"##,
        SIZE - MARGIN
    );
    let _ = writeln!(
        svg,
        r##"<line class="axis" x1="{x0:.2}" y1="{MARGIN}" x2="{x0:.2}" y2="{:.2}" stroke="#999" stroke-width="1"/>"##,
        SIZE - MARGIN
    );
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">I</text>"#, SIZE - MARGIN + 6.0, y0 + 4.0);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">Q</text>"#, x0 - 4.0, MARGIN - 6.0);

    svg.push_str("<g fill=\"#1f77b4\" fill-opacity=\"0.5\">\n");
    for s in samples {
        let _ = writeln!(svg, r#"<circle class="sample" cx="{:.2}" cy="{:.2}" r="1.5"/>"#, x(s.i), y(s.q));
    }
    svg.push_str("</g>\n");

    svg.push_str("<g stroke=\"#d62728\" stroke-width=\"2\" fill=\"none\">\n");
    let arm = 5.0;
    for p in ideal {
        let (cx, cy) = (x(p.i), y(p.q));
        let _ = writeln!(
            svg,
            r#"<path class="ideal" d="M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}"/>"#,
            cx - arm,
            cy - arm,
            cx + arm,
            cy + arm,
            cx - arm,
            cy + arm,
            cx + arm,
            cy - arm
        );
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}
