//! SVG export of page geometry.

use std::fmt::Write;

use super::page::FormPage;
use super::Primitive;

/// Baseline offset below a run's top, as a fraction of its height.
const BASELINE: f64 = 0.8;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Renders the page as a standalone SVG document.
pub fn render_svg(page: &FormPage) -> String {
    let (w, h) = (page.width, page.height);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="white"/>"#);
    for e in &page.elements {
        for p in &e.primitives {
            match p {
                Primitive::Text(t) => {
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" font-size="{:.2}" font-family="font-{}" xml:space="preserve">{}</text>"#,
                        t.x,
                        t.y + BASELINE * t.height,
                        t.height,
                        t.font,
                        escape(&t.text)
                    );
                }
                Primitive::Line(r) => {
                    let dash = r
                        .dash
                        .map(|d| format!(r#" stroke-dasharray="{d:.2}""#))
                        .unwrap_or_default();
                    let _ = writeln!(
                        s,
                        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="{:.2}"{dash}/>"#,
                        r.x1, r.y1, r.x2, r.y2, r.thickness
                    );
                }
                Primitive::Rect(o) => {
                    let _ = writeln!(
                        s,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black" stroke-width="{:.2}"/>"#,
                        o.bbox.left,
                        o.bbox.top,
                        o.bbox.width(),
                        o.bbox.height(),
                        o.thickness
                    );
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
