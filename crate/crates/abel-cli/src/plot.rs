//! Long-format plot data and a minimal static SVG rendering.
//!
//! The CSV (`series,x,y`) feeds any external plotting tool; the SVG is a
//! bare axes-plus-polylines chart for a quick look.

use std::path::Path;

use crate::table::format_value;
use crate::CliError;

/// One named curve.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            name: name.into(),
            points: xs.iter().copied().zip(ys.iter().copied()).collect(),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write `series,x,y` rows, one per point, in series order.
pub fn emit_plot_data(series: &[Series], path: &Path) -> Result<(), CliError> {
    let mut out = String::from("series,x,y\n");
    for s in series {
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "{},{},{}\n",
                s.name,
                format_value(x),
                format_value(y)
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Write a minimal line chart: axes, one polyline per series, a legend.
pub fn emit_svg(series: &[Series], path: &Path) -> Result<(), CliError> {
    let points: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if points.is_empty() {
        (x_lo, x_hi, y_lo, y_hi) = (0.0, 1.0, 0.0, 1.0);
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let sx = |x: f64| MARGIN + (x - x_lo) / (x_hi - x_lo) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN
    ));
    svg.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        t = MARGIN,
        b = HEIGHT - MARGIN
    ));
    for (label, x, y, anchor) in [
        (
            format!("{x_lo:.3}"),
            MARGIN,
            HEIGHT - MARGIN + 16.0,
            "middle",
        ),
        (
            format!("{x_hi:.3}"),
            WIDTH - MARGIN,
            HEIGHT - MARGIN + 16.0,
            "middle",
        ),
        (format!("{y_lo:.3}"), MARGIN - 6.0, HEIGHT - MARGIN, "end"),
        (format!("{y_hi:.3}"), MARGIN - 6.0, MARGIN + 4.0, "end"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-size=\"11\" text-anchor=\"{anchor}\">{label}</text>\n"
        ));
    }
    // curves and legend
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            coords.join(" ")
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" fill=\"{color}\">{name}</text>\n",
            x = WIDTH - MARGIN + 4.0,
            y = MARGIN + 14.0 * i as f64,
            name = s.name
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| io_err(path, e))
}
