//! Standalone SVG charts. Output depends only on the input values, so
//! identical reports give identical bytes.

use std::fmt::Write;

use crate::compacta::Gap;
use crate::gamma::TraceRow;
use crate::rational::{self, to_f64};
use crate::shifts::DensityResult;

const WIDTH: f64 = 640.0;
const MARGIN: f64 = 40.0;

fn header(out: &mut String, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN:.0}" y="20" font-family="monospace" font-size="13">{}</text>"#,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One row per derived level: the unit interval with that level's listed
/// gaps shaded.
pub fn cascade_svg(levels: &[(usize, Vec<Gap>)]) -> String {
    let row = 36.0;
    let height = 2.0 * MARGIN + row * levels.len() as f64;
    let span = WIDTH - 2.0 * MARGIN - 60.0;
    let x0 = MARGIN + 60.0;
    let mut out = String::new();
    header(&mut out, height, "Cantor-Bendixson cascade: gaps per level");
    for (r, (level, gaps)) in levels.iter().enumerate() {
        let y = MARGIN + row * r as f64;
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN:.0}" y="{:.1}" font-family="monospace" font-size="11">level {level}</text>"#,
            y + 16.0
        );
        let _ = writeln!(
            out,
            r#"<line x1="{x0:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
            y + 12.0,
            x0 + span,
            y + 12.0
        );
        for g in gaps {
            let lo = x0 + span * to_f64(&g.lo);
            let w = span * to_f64(&g.width());
            let _ = writeln!(
                out,
                r#"<rect x="{lo:.3}" y="{y:.1}" width="{w:.3}" height="24" fill="steelblue" fill-opacity="0.6"><title>({}, {})</title></rect>"#,
                rational::format(&g.lo),
                rational::format(&g.hi)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Bars of related-pair counts per Γ step; the fixed step is dark.
pub fn trace_svg(rows: &[TraceRow]) -> String {
    let height = 280.0;
    let plot_h = height - 2.0 * MARGIN - 20.0;
    let max = rows.iter().map(|r| r.pair_count).max().unwrap_or(1).max(1) as f64;
    let bar = ((WIDTH - 2.0 * MARGIN) / rows.len().max(1) as f64).min(80.0);
    let mut out = String::new();
    header(&mut out, height, "Gamma trace: related pairs per step");
    let base = MARGIN + plot_h + 10.0;
    for (i, r) in rows.iter().enumerate() {
        let h = plot_h * r.pair_count as f64 / max;
        let x = MARGIN + bar * i as f64;
        let fill = if r.is_fixed { "darkred" } else { "indianred" };
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.3}" width="{:.1}" height="{h:.3}" fill="{fill}"><title>step {}: {}</title></rect>"#,
            x + 4.0,
            base - h,
            bar - 8.0,
            r.step,
            r.pair_count
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11">{}</text>"#,
            x + 4.0,
            base + 14.0,
            r.step
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Bars of the best independence density per window length.
pub fn density_svg(rows: &[DensityResult]) -> String {
    let height = 280.0;
    let plot_h = height - 2.0 * MARGIN - 20.0;
    let bar = ((WIDTH - 2.0 * MARGIN) / rows.len().max(1) as f64).min(60.0);
    let mut out = String::new();
    header(&mut out, height, "Independence density by window length");
    let base = MARGIN + plot_h + 10.0;
    for (i, r) in rows.iter().enumerate() {
        let h = plot_h * to_f64(&r.density);
        let x = MARGIN + bar * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.3}" width="{:.1}" height="{h:.3}" fill="seagreen"><title>l={}: {}</title></rect>"#,
            x + 3.0,
            base - h,
            bar - 6.0,
            r.window,
            rational::format(&r.density)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="monospace" font-size="11">{}</text>"#,
            x + 3.0,
            base + 14.0,
            r.window
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{half, one, q, zero};

    #[test]
    fn cascade_rows() {
        let g = Gap {
            lo: zero(),
            hi: half(),
            lo_in_a: false,
            hi_in_a: true,
        };
        let svg = cascade_svg(&[(0, vec![g.clone()]), (1, vec![]), (2, vec![])]);
        assert_eq!(svg.matches("level ").count(), 3);
        assert_eq!(svg, cascade_svg(&[(0, vec![g]), (1, vec![]), (2, vec![])]));
        assert!(svg.ends_with("</svg>\n"));
    }

    fn row(window: usize, density: crate::Q) -> DensityResult {
        DensityResult {
            positions: vec![],
            window,
            density,
            exact: true,
        }
    }

    #[test]
    fn density_bars() {
        let svg = density_svg(&[row(2, q(1, 2)), row(3, one() - q(1, 3))]);
        assert_eq!(svg.matches("<rect x=").count(), 2);
    }
}
