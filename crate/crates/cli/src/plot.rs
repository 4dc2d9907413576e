//! CSV and SVG renderings of tensors and diagram files.

use std::fmt::Write as _;

use tmp_core::pipeline::DiagramGrid;
use tmp_core::{TmpTensor, Vectorization};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 40.0;
const PALETTE: [&str; 8] = [
    "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg_open(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <title>{}</title>\n\
         <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n",
        escape(title)
    )
}

/// Rows of the tensor as CSV: leading index columns, then the last axis.
pub fn tensor_csv(t: &TmpTensor) -> String {
    let shape = t.shape();
    let last = *shape.last().unwrap_or(&1);
    let lead = &t.meta().axes[..shape.len().saturating_sub(1).min(t.meta().axes.len())];
    let mut out = String::new();
    let mut header: Vec<String> = lead.to_vec();
    header.extend((1..=last).map(|i| format!("c{i}")));
    let _ = writeln!(out, "{}", header.join(","));
    for (r, row) in t.data().chunks(last.max(1)).enumerate() {
        // decode the row number into the leading indices, 1-based
        let mut idx = Vec::with_capacity(shape.len() - 1);
        let mut rem = r;
        for &e in shape[..shape.len() - 1].iter().rev() {
            idx.push(rem % e + 1);
            rem /= e;
        }
        idx.reverse();
        let mut cells: Vec<String> = idx.iter().map(usize::to_string).collect();
        cells.extend(row.iter().map(|x| format!("{x}")));
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

fn step_plot(t: &TmpTensor) -> String {
    let mut svg = svg_open(&format!("{} fingerprint", t.meta().vectorization.name()));
    let cols = t.shape()[1];
    let ymax = t.data().iter().copied().fold(0.0f64, f64::max).max(1.0);
    let x = |i: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * i / cols as f64;
    let y = |v: f64| HEIGHT - MARGIN - (HEIGHT - 2.0 * MARGIN) * v / ymax;
    let _ = writeln!(
        svg,
        "<line x1=\"{MARGIN}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    for j in 0..t.levels() {
        let mut points = String::new();
        for (i, &v) in t.slice(j).iter().enumerate() {
            let _ = write!(points, "{:.2},{:.2} {:.2},{:.2} ", x(i as f64), y(v), x(i as f64 + 1.0), y(v));
        }
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"><title>level {}</title></polyline>",
            PALETTE[j % PALETTE.len()],
            points.trim_end(),
            j + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn heatmap(t: &TmpTensor) -> String {
    let mut svg = svg_open(&format!("{} fingerprint", t.meta().vectorization.name()));
    let last = *t.shape().last().unwrap();
    let rows = t.data().len() / last.max(1);
    let scale = t.data().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let cw = (WIDTH - 2.0 * MARGIN) / last as f64;
    let ch = (HEIGHT - 2.0 * MARGIN) / rows.max(1) as f64;
    for (r, row) in t.data().chunks(last.max(1)).enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let s = if scale > 0.0 { v / scale } else { 0.0 };
            // white at zero, red for positive, blue for negative
            let fade = (255.0 * (1.0 - s.abs())).round() as u8;
            let fill = if s >= 0.0 {
                format!("rgb(255,{fade},{fade})")
            } else {
                format!("rgb({fade},{fade},255)")
            };
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{fill}\"/>",
                MARGIN + c as f64 * cw,
                MARGIN + r as f64 * ch,
                cw,
                ch
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Betti tensors become step plots, one curve per level; everything else
/// becomes a heatmap with one row per level (per level and pixel row for
/// images).
pub fn tensor(t: &TmpTensor) -> (String, String) {
    let svg = match t.meta().vectorization {
        Vectorization::BettiZigzag | Vectorization::BettiFast if t.shape().len() == 2 => step_plot(t),
        _ => heatmap(t),
    };
    (tensor_csv(t), svg)
}

/// Interval list as CSV and a barcode per slice.
pub fn diagrams(grid: &DiagramGrid) -> (String, String) {
    let mut csv = String::from("slice,dim,birth,death,right_open\n");
    let mut bars = Vec::new();
    for j in 1..=grid.levels() {
        for &k in grid.dims() {
            for iv in grid.get(j, k).expect("cell exists").intervals() {
                let _ = writeln!(csv, "{j},{k},{},{},{}", iv.birth_time(), iv.death_time(), iv.right_open);
                bars.push((j, k, iv.birth_time(), iv.death_time()));
            }
        }
    }
    let mut svg = svg_open("zigzag barcodes");
    let tmax = grid.times().max(2) as f64;
    let x = |t: f64| MARGIN + (WIDTH - 2.0 * MARGIN) * (t - 1.0) / (tmax - 1.0);
    let step = (HEIGHT - 2.0 * MARGIN) / bars.len().max(1) as f64;
    for (i, &(j, k, b, d)) in bars.iter().enumerate() {
        let y = MARGIN + step * (i as f64 + 0.5);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"2\" stroke-linecap=\"round\"><title>slice {j} dim {k}</title></line>",
            x(b),
            x(d),
            PALETTE[k % PALETTE.len()]
        );
    }
    svg.push_str("</svg>\n");
    (csv, svg)
}
