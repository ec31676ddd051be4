//! SVG plots of chains over the fundamental strip [−1/2, 1/2] and one
//! periodic image to its right.

use std::fmt::Write;

use crate::contour::Chain;

const WIDTH_PX: f64 = 800.0;

/// One chain per layer, drawn in the given stroke colour.
pub struct Layer<'a> {
    pub chain: &'a Chain,
    pub color: &'a str,
    pub label: &'a str,
}

pub fn render(layers: &[Layer]) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for l in layers {
        for p in l.chain.flatten() {
            lo = lo.min(p.x2);
            hi = hi.max(p.x2);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        (lo, hi) = (-0.5, 0.5);
    }
    let pad = 0.1 * (hi - lo).max(0.2);
    let (y0, y1) = (lo - pad, hi + pad);
    let (x0, x1) = (-1.0, 2.0);
    let scale = WIDTH_PX / (x1 - x0);
    let height = (y1 - y0) * scale;
    let tx = |x: f64| (x - x0) * scale;
    let ty = |y: f64| (y1 - y) * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH_PX:.0}" height="{height:.0}" viewBox="0 0 {WIDTH_PX:.0} {height:.3}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for xb in [-0.5, 0.5, 1.5] {
        let _ = writeln!(
            s,
            r#"<line x1="{x:.3}" y1="0" x2="{x:.3}" y2="{height:.3}" stroke="gray" stroke-dasharray="4 4"/>"#,
            x = tx(xb)
        );
    }
    for (li, l) in layers.iter().enumerate() {
        let _ = writeln!(s, r#"<g stroke="{}" fill="none"><title>{}</title>"#, l.color, l.label);
        for c in l.chain.curves() {
            let w = c.winding() as f64;
            for (shift, opacity) in [(0.0, 1.0), (1.0, 0.4)] {
                let mut pts: Vec<(f64, f64)> = c.nodes().iter().map(|p| (p.x1 + shift, p.x2)).collect();
                let first = pts[0];
                pts.push((first.0 + w, first.1));
                let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.3},{:.3}", tx(x), ty(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" stroke-opacity="{opacity}" stroke-width="{}"/>"#,
                    d.join(" "),
                    1.5 + li as f64 * 0.5
                );
            }
        }
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    s
}
