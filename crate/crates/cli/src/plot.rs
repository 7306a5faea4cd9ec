//! Figure rendering without a plotting dependency: hand-written SVG for the
//! vector output plus a coarse PNG raster fallback. CSVs remain the ground
//! truth; a failure here never touches data outputs.

use std::path::{Path, PathBuf};

use anyhow::Result;
use image::{Rgb, RgbImage};

pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

const PALETTE: [(u8, u8, u8); 16] = [
    (31, 119, 180),
    (255, 127, 14),
    (44, 160, 44),
    (214, 39, 40),
    (148, 103, 189),
    (140, 86, 75),
    (227, 119, 194),
    (127, 127, 127),
    (188, 189, 34),
    (23, 190, 207),
    (174, 199, 232),
    (255, 187, 120),
    (152, 223, 138),
    (255, 152, 150),
    (197, 176, 213),
    (196, 156, 148),
];

fn color(index: usize) -> (u8, u8, u8) {
    PALETTE[index % PALETTE.len()]
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Binary significance heatmap: white cell = significant, black = not.
pub fn heatmap_svg(title: &str, row_labels: &[&str], col_labels: &[&str], cells: &[Vec<bool>]) -> String {
    let cell = 24.0;
    let left = 230.0;
    let top = 50.0;
    let label_space = 150.0;
    let width = left + col_labels.len() as f64 * cell + 20.0;
    let height = top + row_labels.len() as f64 * cell + label_space;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#f4f4f4\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{left}\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        escape(title)
    ));
    for (r, row) in cells.iter().enumerate() {
        let y = top + r as f64 * cell;
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            left - 8.0,
            y + cell * 0.7,
            escape(row_labels[r])
        ));
        for (c, &on) in row.iter().enumerate() {
            let x = left + c as f64 * cell;
            let fill = if on { "#ffffff" } else { "#000000" };
            svg.push_str(&format!(
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell}\" height=\"{cell}\" \
                 fill=\"{fill}\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n"
            ));
        }
    }
    let base_y = top + cells.len() as f64 * cell;
    for (c, label) in col_labels.iter().enumerate() {
        let x = left + c as f64 * cell + cell * 0.7;
        let y = base_y + 8.0;
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"end\" \
             transform=\"rotate(-60 {x:.1} {y:.1})\">{}</text>\n",
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn heatmap_png(cells: &[Vec<bool>]) -> RgbImage {
    let scale = 16u32;
    let rows = cells.len() as u32;
    let cols = cells.first().map_or(0, |r| r.len()) as u32;
    let mut img = RgbImage::from_pixel(cols * scale + 2, rows * scale + 2, Rgb([136, 136, 136]));
    for (r, row) in cells.iter().enumerate() {
        for (c, &on) in row.iter().enumerate() {
            let pixel = if on { Rgb([255, 255, 255]) } else { Rgb([0, 0, 0]) };
            for dy in 1..scale {
                for dx in 1..scale {
                    img.put_pixel(c as u32 * scale + dx, r as u32 * scale + dy, pixel);
                }
            }
        }
    }
    img
}

fn value_range(series: &[Series]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in series {
        for &v in &s.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.1).max(0.25);
    (lo - pad, hi + pad)
}

/// Multi-series line plot over categorical x positions.
pub fn line_plot_svg(title: &str, x_labels: &[&str], series: &[Series], y_label: &str) -> String {
    let left = 60.0;
    let top = 40.0;
    let plot_w = (x_labels.len() as f64 * 38.0).max(420.0);
    let plot_h = 300.0;
    let label_space = 150.0;
    let legend_w = 190.0;
    let width = left + plot_w + legend_w;
    let height = top + plot_h + label_space;
    let (lo, hi) = value_range(series);
    let x_of = |i: usize| left + (i as f64 + 0.5) / x_labels.len() as f64 * plot_w;
    let y_of = |v: f64| top + (hi - v) / (hi - lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{left}\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        escape(title)
    ));
    svg.push_str(&format!(
        "<rect x=\"{left}\" y=\"{top}\" width=\"{plot_w:.1}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333333\"/>\n"
    ));
    // horizontal reference lines at integer values, the zero line heavier
    let mut tick = lo.ceil();
    while tick <= hi {
        let y = y_of(tick);
        let (stroke, width_px) = if tick == 0.0 { ("#555555", 1.4) } else { ("#dddddd", 0.8) };
        svg.push_str(&format!(
            "<line x1=\"{left}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" \
             stroke=\"{stroke}\" stroke-width=\"{width_px}\"/>\n",
            left + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{tick}</text>\n",
            left - 6.0,
            y + 4.0
        ));
        tick += 1.0;
    }
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{}</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(y_label)
    ));
    for (i, label) in x_labels.iter().enumerate() {
        let x = x_of(i);
        let y = top + plot_h + 12.0;
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"end\" \
             transform=\"rotate(-60 {x:.1} {y:.1})\">{}</text>\n",
            escape(label)
        ));
    }
    for (s_index, s) in series.iter().enumerate() {
        let (r, g, b) = color(s_index);
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.1},{:.1}", x_of(i), y_of(v)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"rgb({r},{g},{b})\" stroke-width=\"1.6\"/>\n",
            points.join(" ")
        ));
        let legend_y = top + 14.0 * s_index as f64;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
             stroke=\"rgb({r},{g},{b})\" stroke-width=\"3\"/>\n",
            left + plot_w + 12.0,
            legend_y,
            left + plot_w + 32.0,
            legend_y
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>\n",
            left + plot_w + 38.0,
            legend_y + 4.0,
            escape(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Vertical bar chart for per-category values, e.g. per-dimension RMSE.
pub fn bar_chart_svg(title: &str, labels: &[&str], values: &[f64], y_label: &str) -> String {
    let left = 60.0;
    let top = 40.0;
    let bar_w = 26.0;
    let gap = 10.0;
    let plot_h = 280.0;
    let label_space = 150.0;
    let plot_w = labels.len() as f64 * (bar_w + gap) + gap;
    let width = left + plot_w + 20.0;
    let height = top + plot_h + label_space;
    let hi = values.iter().cloned().fold(0.0f64, f64::max).max(1e-9) * 1.1;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{left}\" y=\"24\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        escape(title)
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" transform=\"rotate(-90 16 {:.1})\" text-anchor=\"middle\">{}</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0,
        escape(y_label)
    ));
    for (i, (&label, &value)) in labels.iter().zip(values.iter()).enumerate() {
        let x = left + gap + i as f64 * (bar_w + gap);
        let h = (value / hi * plot_h).max(0.0);
        let y = top + plot_h - h;
        let (r, g, b) = color(0);
        svg.push_str(&format!(
            "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{bar_w}\" height=\"{h:.1}\" fill=\"rgb({r},{g},{b})\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"10\">{value:.2}</text>\n",
            x + bar_w / 2.0,
            y - 4.0
        ));
        let lx = x + bar_w * 0.7;
        let ly = top + plot_h + 12.0;
        svg.push_str(&format!(
            "<text x=\"{lx:.1}\" y=\"{ly:.1}\" text-anchor=\"end\" \
             transform=\"rotate(-60 {lx:.1} {ly:.1})\">{}</text>\n",
            escape(label)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Raster fallback for the bar chart.
pub fn bar_chart_png(values: &[f64]) -> RgbImage {
    let (width, height) = (800u32, 480u32);
    let (left, top, plot_w, plot_h) = (40.0, 20.0, 720.0, 420.0);
    let mut img = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let hi = values.iter().cloned().fold(0.0f64, f64::max).max(1e-9) * 1.1;
    let slot = plot_w / values.len().max(1) as f64;
    let (r, g, b) = color(0);
    for (i, &value) in values.iter().enumerate() {
        let h = value / hi * plot_h;
        let x0 = (left + i as f64 * slot + slot * 0.15) as u32;
        let x1 = (left + i as f64 * slot + slot * 0.85) as u32;
        let y0 = (top + plot_h - h) as u32;
        let y1 = (top + plot_h) as u32;
        for x in x0..x1 {
            for y in y0..y1 {
                img.put_pixel(x, y, Rgb([r, g, b]));
            }
        }
    }
    img
}

fn draw_segment(img: &mut RgbImage, x0: f64, y0: f64, x1: f64, y1: f64, pixel: Rgb<u8>) {
    let steps = ((x1 - x0).abs().max((y1 - y0).abs()) as u32).max(1);
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        let x = (x0 + (x1 - x0) * t).round();
        let y = (y0 + (y1 - y0) * t).round();
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, pixel);
        }
    }
}

/// Raster fallback for the line plot: same geometry, no text.
pub fn line_plot_png(x_count: usize, series: &[Series]) -> RgbImage {
    let (width, height) = (800u32, 480u32);
    let (left, top, plot_w, plot_h) = (40.0, 20.0, 720.0, 420.0);
    let mut img = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let (lo, hi) = value_range(series);
    let x_of = |i: usize| left + (i as f64 + 0.5) / x_count.max(1) as f64 * plot_w;
    let y_of = |v: f64| top + (hi - v) / (hi - lo) * plot_h;
    draw_segment(&mut img, left, top, left, top + plot_h, Rgb([0, 0, 0]));
    draw_segment(&mut img, left, top + plot_h, left + plot_w, top + plot_h, Rgb([0, 0, 0]));
    if lo < 0.0 && hi > 0.0 {
        let y = y_of(0.0);
        draw_segment(&mut img, left, y, left + plot_w, y, Rgb([160, 160, 160]));
    }
    for (s_index, s) in series.iter().enumerate() {
        let (r, g, b) = color(s_index);
        for window in s.values.windows(2).enumerate().map(|(i, w)| (i, w[0], w[1])) {
            let (i, a, b_val) = window;
            draw_segment(
                &mut img,
                x_of(i),
                y_of(a),
                x_of(i + 1),
                y_of(b_val),
                Rgb([r, g, b]),
            );
        }
    }
    img
}

/// Write `<base>.svg` and `<base>.png`, returning the created paths.
pub fn write_pair(base: &Path, svg: &str, png: &RgbImage) -> Result<Vec<PathBuf>> {
    let svg_path = base.with_extension("svg");
    let png_path = base.with_extension("png");
    std::fs::write(&svg_path, svg)?;
    png.save(&png_path)?;
    Ok(vec![svg_path, png_path])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_svg_marks_significant_cells_white() {
        let cells = vec![vec![true, false], vec![false, false]];
        let svg = heatmap_svg("t", &["r1", "r2"], &["c1", "c2"], &cells);
        assert_eq!(svg.matches("fill=\"#ffffff\"").count(), 1);
        assert_eq!(svg.matches("fill=\"#000000\"").count(), 3);
    }

    #[test]
    fn line_plot_has_one_polyline_per_series() {
        let series = vec![
            Series { label: "a".into(), values: vec![1.0, 2.0, 0.5] },
            Series { label: "b".into(), values: vec![-1.0, 0.0, 1.0] },
        ];
        let svg = line_plot_svg("t", &["x", "y", "z"], &series, "value");
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn write_pair_creates_both_files() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("figure");
        let cells = vec![vec![true, false]];
        let files = write_pair(&base, &heatmap_svg("t", &["r"], &["a", "b"], &cells), &heatmap_png(&cells)).unwrap();
        assert!(files.iter().all(|f| f.exists()));
    }
}
