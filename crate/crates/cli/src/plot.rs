//! Minimal SVG rendering of the (δ, ρ) plane.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Theory curves are drawn dashed and in grey.
    pub theory: bool,
}

fn x_of(delta: f64) -> f64 {
    LEFT + delta * (WIDTH - LEFT - RIGHT)
}

fn y_of(rho: f64) -> f64 {
    TOP + (1.0 - rho) * (HEIGHT - TOP - BOTTOM)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One `<polyline>` per series; axes, ticks and legend swatches use
/// `<line>` so the polyline count equals the number of series.
pub fn render(series: &[Series]) -> String {
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (x_of(0.0), x_of(1.0), y_of(0.0), y_of(1.0));
    let _ = writeln!(svg, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let (x, y) = (x_of(t), y_of(t));
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{}"/>"#, y0 + 5.0);
        let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y}" x2="{}" y2="{y}"/>"#, x0 - 5.0);
    }
    let _ = writeln!(svg, "</g>");
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{t:.1}</text>"#, x_of(t), y0 + 20.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{t:.1}</text>"#, x0 - 8.0, y_of(t) + 4.0);
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">δ = n/N</text>"#, 0.5 * (x0 + x1), HEIGHT - 15.0);
    let _ = writeln!(svg, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">ρ = k/n</text>"#, 0.5 * (y0 + y1), 0.5 * (y0 + y1));

    let mut color = 0;
    for (i, s) in series.iter().enumerate() {
        let (stroke, dash) = if s.theory {
            ("#555555", r#" stroke-dasharray="6 4""#)
        } else {
            color += 1;
            (PALETTE[(color - 1) % PALETTE.len()], "")
        };
        let points: Vec<String> = s.points.iter().map(|&(d, r)| format!("{:.2},{:.2}", x_of(d), y_of(r))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{stroke}" stroke-width="1.5"{dash} points="{}"/>"#,
            points.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{stroke}" stroke-width="2"{dash}/>"#, lx + 25.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 32.0, ly + 4.0, escape(&s.label));
    }
    svg.push_str("</svg>\n");
    svg
}
