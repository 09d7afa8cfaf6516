//! Static SVG rendering of a predicted cooperation curve.

use std::fmt::Write;

use coopbasin::estimation::{Prediction, KNOT};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;

fn sx(p: f64) -> f64 {
    LEFT + p * (WIDTH - LEFT - RIGHT)
}

fn sy(rate: f64) -> f64 {
    HEIGHT - BOTTOM - rate * (HEIGHT - TOP - BOTTOM)
}

/// Rate against basin size with its 95% band, a dashed line at the knot,
/// and optional markers (e.g. the design points).
pub fn render(curve: &[Prediction], markers: &[Prediction]) -> String {
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for i in 0..=10 {
        let v = i as f64 / 10.0;
        writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#e5e5e5"/>"##,
            sx(0.0),
            sy(v),
            sx(1.0),
            sy(v)
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{v:.1}</text>"#,
            sx(0.0) - 6.0,
            sy(v) + 4.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{v:.1}</text>"#,
            sx(v),
            sy(0.0) + 18.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black" stroke-dasharray="4 4"/>"#,
        sx(KNOT),
        sy(0.0),
        sy(1.0)
    )
    .unwrap();
    if !curve.is_empty() {
        let mut band = String::new();
        for p in curve {
            write!(band, "{:.2},{:.2} ", sx(p.p_star), sy(p.upper)).unwrap();
        }
        for p in curve.iter().rev() {
            write!(band, "{:.2},{:.2} ", sx(p.p_star), sy(p.lower)).unwrap();
        }
        writeln!(s, r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##, band.trim_end()).unwrap();
        let line: Vec<String> = curve
            .iter()
            .map(|p| format!("{:.2},{:.2}", sx(p.p_star), sy(p.rate)))
            .collect();
        writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="2"/>"##,
            line.join(" ")
        )
        .unwrap();
    }
    for m in markers {
        writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="black"/>"#,
            sx(m.p_star),
            sy(m.rate)
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/>"#,
        sx(0.0),
        sy(0.0),
        sx(1.0)
    )
    .unwrap();
    writeln!(
        s,
        r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/>"#,
        sx(0.0),
        sy(0.0),
        sy(1.0)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">basin size p*</text>"#,
        sx(0.5),
        HEIGHT - 14.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">predicted cooperation</text>"#,
        sy(0.5)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}
