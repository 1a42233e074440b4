use std::fmt::Write;

use crate::metrics::FitResult;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PlotLabels {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Axis range padded by 5% on each side; a zero-width range is widened so a
/// single point lands in the middle of the plot.
fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    let pad = if span > 0.0 { span * 0.05 } else { lo.abs().max(1.0) * 0.05 };
    (lo - pad, hi + pad)
}

/// Standalone scatter plot. The fitted line, if given, is drawn across the
/// x-range of the data and its r² is printed under the title. Identical input
/// gives identical bytes.
pub fn emit_scatter_svg(points: &[(f64, f64)], fit: Option<&FitResult<f64>>, labels: &PlotLabels) -> String {
    let (x0, x1) = range(points.iter().map(|p| p.0));
    let (y0, y1) = range(points.iter().map(|p| p.1).chain(fit.into_iter().flat_map(|f| {
        let (lo, hi) = data_x_range(points);
        [f.predict(lo), f.predict(hi)]
    })));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&labels.title));
    if let Some(f) = fit {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="33" text-anchor="middle">y = {:.4}x + {:.4}, r² = {:.3}</text>"#,
            WIDTH / 2.0,
            f.slope,
            f.intercept,
            f.r_squared
        );
    }
    let (bx, by) = (LEFT, TOP + plot_h);
    let _ = writeln!(svg, r#"<line x1="{bx}" y1="{by}" x2="{}" y2="{by}" stroke="black"/>"#, LEFT + plot_w);
    let _ = writeln!(svg, r#"<line x1="{bx}" y1="{TOP}" x2="{bx}" y2="{by}" stroke="black"/>"#);
    for t in 0..=4 {
        let frac = t as f64 / 4.0;
        let (xv, yv) = (x0 + frac * (x1 - x0), y0 + frac * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(svg, r#"<line x1="{px:.2}" y1="{by}" x2="{px:.2}" y2="{}" stroke="black"/>"#, by + 5.0);
        let _ = writeln!(svg, r#"<text x="{px:.2}" y="{}" text-anchor="middle" font-size="10">{}</text>"#, by + 17.0, tick(xv, x1 - x0));
        let _ = writeln!(svg, r#"<line x1="{}" y1="{py:.2}" x2="{bx}" y2="{py:.2}" stroke="black"/>"#, bx - 5.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
            bx - 7.0,
            py + 3.0,
            tick(yv, y1 - y0)
        );
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + plot_w / 2.0, HEIGHT - 10.0, escape(&labels.x_label));
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        TOP + plot_h / 2.0,
        escape(&labels.y_label)
    );
    for &(x, y) in points {
        let _ = writeln!(svg, r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, sx(x), sy(y));
    }
    if let (Some(f), true) = (fit, points.len() >= 2) {
        let (lo, hi) = data_x_range(points);
        let _ = writeln!(
            svg,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-width="1.5"/>"#,
            sx(lo),
            sy(f.predict(lo)),
            sx(hi),
            sy(f.predict(hi))
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn data_x_range(points: &[(f64, f64)]) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)))
}

/// Enough decimals to tell neighbouring ticks apart.
fn tick(v: f64, span: f64) -> String {
    let decimals = if span > 0.0 { (-(span / 4.0).log10()).ceil().max(0.0) as usize + 1 } else { 2 };
    format!("{v:.decimals$}")
}
