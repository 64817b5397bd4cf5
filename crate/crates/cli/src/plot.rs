//! Static SVG emission: log-log norm curves per p with lo/hi bands, an
//! optional envelope overlay, and the source rows embedded as a comment.

use crate::run::NormRow;
use anyhow::{bail, Result};
use std::fmt::Write as _;

const W: f64 = 840.0;
const H: f64 = 560.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

struct LogMap {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl LogMap {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (W - 2.0 * MARGIN) * (v.ln() - self.x0) / (self.x1 - self.x0)
    }
    fn y(&self, v: f64) -> f64 {
        H - MARGIN - (H - 2.0 * MARGIN) * (v.ln() - self.y0) / (self.y1 - self.y0)
    }
}

fn polyline(points: &[(f64, f64)], map: &LogMap, color: &str, dashed: bool) -> String {
    let pts: Vec<String> = points
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", map.x(x), map.y(y)))
        .collect();
    let dash = if dashed {
        " stroke-dasharray=\"5,4\""
    } else {
        ""
    };
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"{dash} points=\"{}\"/>\n",
        pts.join(" ")
    )
}

/// Renders the rows as a log-log SVG plot. Errors on an empty row set
/// (callers must not write any file in that case).
pub fn render_svg(
    rows: &[NormRow],
    title: &str,
    envelope: Option<(&str, &[(f64, f64)])>,
) -> Result<String> {
    if rows.is_empty() {
        bail!("no data rows to plot");
    }
    let mut ps: Vec<f64> = rows.iter().map(|r| r.p).collect();
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut xs: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut ylo = f64::INFINITY;
    let mut yhi = f64::NEG_INFINITY;
    for r in rows {
        if r.lo > 0.0 {
            ylo = ylo.min(r.lo);
        }
        if r.hi.is_finite() {
            yhi = yhi.max(r.hi);
        }
    }
    if let Some((_, env)) = envelope {
        for &(_, v) in env {
            if v > 0.0 {
                ylo = ylo.min(v);
                yhi = yhi.max(v);
            }
        }
    }
    if !(ylo.is_finite() && yhi.is_finite() && ylo > 0.0) {
        bail!("rows contain no positive finite values to plot");
    }
    let map = LogMap {
        x0: xs[0].ln(),
        x1: xs[xs.len() - 1].ln().max(xs[0].ln() + 1e-9),
        y0: ylo.ln() - 0.05,
        y1: yhi.ln() + 0.05,
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.0}\" y=\"28\" font-family=\"monospace\" font-size=\"16\">{title}</text>",
        MARGIN
    );

    // frame and log-scale ticks
    let _ = writeln!(
        svg,
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w:.0}\" height=\"{h:.0}\" fill=\"none\" stroke=\"#444\"/>",
        m = MARGIN,
        w = W - 2.0 * MARGIN,
        h = H - 2.0 * MARGIN
    );
    for i in 0..=6 {
        let lx = map.x0 + (map.x1 - map.x0) * i as f64 / 6.0;
        let v = lx.exp();
        let x = map.x(v);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#ccc\"/>\
             <text x=\"{x:.1}\" y=\"{:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"middle\">{v:.3e}</text>",
            MARGIN, H - MARGIN, H - MARGIN + 16.0
        );
        let ly = map.y0 + (map.y1 - map.y0) * i as f64 / 6.0;
        let vy = ly.exp();
        let y = map.y(vy);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#ccc\"/>\
             <text x=\"{:.1}\" y=\"{y:.1}\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">{vy:.3e}</text>",
            MARGIN, W - MARGIN, MARGIN - 6.0
        );
    }

    for (pi, &p) in ps.iter().enumerate() {
        let color = PALETTE[pi % PALETTE.len()];
        let mut mids = Vec::new();
        let mut los = Vec::new();
        let mut his = Vec::new();
        for r in rows.iter().filter(|r| (r.p - p).abs() < 1e-12) {
            if r.mid() > 0.0 && r.mid().is_finite() {
                mids.push((r.lambda, r.mid()));
            }
            if r.lo > 0.0 {
                los.push((r.lambda, r.lo));
            }
            if r.hi.is_finite() && r.hi > 0.0 {
                his.push((r.lambda, r.hi));
            }
        }
        svg.push_str(&polyline(&mids, &map, color, false));
        svg.push_str(&polyline(&los, &map, color, true));
        svg.push_str(&polyline(&his, &map, color, true));
        let _ = writeln!(
            svg,
            "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"12\" fill=\"{color}\">p = {p}</text>",
            W - MARGIN + 6.0,
            MARGIN + 16.0 * (pi as f64 + 1.0)
        );
    }

    if let Some((label, env)) = envelope {
        let pts: Vec<(f64, f64)> = env.iter().copied().filter(|&(_, v)| v > 0.0).collect();
        svg.push_str(&polyline(&pts, &map, "#333333", true));
        let _ = writeln!(
            svg,
            "<text x=\"{:.0}\" y=\"{:.0}\" font-family=\"monospace\" font-size=\"12\" fill=\"#333\">{label}</text>",
            W - MARGIN + 6.0,
            MARGIN
        );
    }

    // embedded data table
    svg.push_str("<!-- data\n");
    svg.push_str(&crate::run::norms_csv(rows));
    svg.push_str("-->\n");
    svg.push_str("</svg>\n");
    Ok(svg)
}
