//! SVG plot of section zeros on S².
//!
//! Two discs: the hemisphere z ≤ 0 projected stereographically from (0,0,1) and the
//! hemisphere z > 0 projected from (0,0,−1). Each is the unit disc. Index +1 is drawn
//! red, −1 blue, anything else black.

use std::fmt::Write;

use crate::zeros::ZeroSet;

const RADIUS: f64 = 180.0;
const MARGIN: f64 = 20.0;

fn project(v: [f64; 3]) -> (usize, f64, f64) {
    let [x, y, z] = v;
    if z <= 0.0 {
        (0, x / (1.0 - z), y / (1.0 - z))
    } else {
        (1, x / (1.0 + z), y / (1.0 + z))
    }
}

pub fn zeros_svg(zeros: &ZeroSet, title: &str) -> String {
    let side = 2.0 * (RADIUS + MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = 2.0 * side,
        h = side + 30.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14" font-family="sans-serif">{}</text>"#,
        MARGIN,
        escape(title)
    );
    for (panel, label) in ["z ≤ 0", "z > 0"].iter().enumerate() {
        let cx = panel as f64 * side + side / 2.0;
        let cy = 30.0 + side / 2.0;
        let _ = writeln!(
            s,
            r#"<circle cx="{cx}" cy="{cy}" r="{RADIUS}" fill="none" stroke="gray"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" font-family="sans-serif">{label}</text>"#,
            cx - RADIUS,
            cy + RADIUS + 14.0
        );
    }
    for z in &zeros.zeros {
        let (panel, u, v) = project(z.point.0);
        let cx = panel as f64 * side + side / 2.0 + RADIUS * u;
        let cy = 30.0 + side / 2.0 - RADIUS * v;
        let color = match z.index {
            1 => "red",
            -1 => "blue",
            _ => "black",
        };
        let stroke = if z.certified { "none" } else { "black" };
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="4" fill="{color}" stroke="{stroke}"><title>index {}</title></circle>"#,
            z.index
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
