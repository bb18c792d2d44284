//! Static map of a run: base stations, PoPs colored by ring and the reach
//! circle of each PoP. Built only from what the CSV files contain.

use std::collections::BTreeMap;
use std::fmt::Write;

use stochtopo::geometry::Rect;
use stochtopo::process::BaseStation;

use crate::output::{fmt6, PopRow};

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const SIZE_PX: f64 = 800.0;

/// `reach` maps ring name to its maximum BS distance in km; rings absent
/// from it get no circle.
pub fn render(
    bounds: &Rect<f64>,
    bss: &[BaseStation<f64>],
    pops: &[PopRow],
    reach: &BTreeMap<String, Option<f64>>,
) -> String {
    let scale = SIZE_PX / bounds.width().max(bounds.height());
    let w = bounds.width() * scale;
    let h = bounds.height() * scale;
    let px = |x1: f64| fmt6((x1 - bounds.x1_left) * scale);
    // north up: x2_top maps to y = 0
    let py = |x2: f64| fmt6((bounds.x2_top - x2) * scale);

    let ring_order: Vec<&String> = reach.keys().collect();
    let colour = |ring: &str| {
        let i = ring_order.iter().position(|r| r.as_str() == ring).unwrap_or(ring_order.len());
        PALETTE[i % PALETTE.len()]
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt6(w),
        fmt6(h),
        fmt6(w),
        fmt6(h)
    );
    let _ = writeln!(s, r##"<rect width="100%" height="100%" fill="#ffffff" stroke="#333333"/>"##);
    let _ = writeln!(s, r#"<g id="reach" fill="none" stroke-width="1" stroke-dasharray="4 3">"#);
    for p in pops {
        if let Some(Some(m)) = reach.get(&p.ring) {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="{}" stroke="{}"/>"#,
                px(p.location.x1),
                py(p.location.x2),
                fmt6(m * scale),
                colour(&p.ring)
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="bs" fill="#444444">"##);
    for b in bss {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="2"/>"#, px(b.location.x1), py(b.location.x2));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="pops" stroke="#000000" stroke-width="1">"##);
    for p in pops {
        let x = (p.location.x1 - bounds.x1_left) * scale;
        let y = (bounds.x2_top - p.location.x2) * scale;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"><title>PoP {} ({})</title></rect>"#,
            fmt6(x - 5.0),
            fmt6(y - 5.0),
            colour(&p.ring),
            p.id,
            escape(&p.ring)
        );
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}
