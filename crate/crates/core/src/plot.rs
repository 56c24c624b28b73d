//! SVG learning curves: smoothed mean over seeds with a min/max band.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rl::smooth;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_Y: f64 = 40.0;
/// Upper bound on plotted points per curve; longer curves are strided.
const MAX_POINTS: usize = 400;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Per-seed returns of one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub runs: Vec<Vec<f64>>,
}

struct Band {
    mean: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

fn band(s: &Series, window: usize) -> Result<Band> {
    if s.runs.is_empty() {
        return Err(Error::input(format!("series `{}` has no runs", s.label)));
    }
    let n = s.runs.iter().map(Vec::len).min().unwrap();
    if n == 0 {
        return Err(Error::input(format!("series `{}` has an empty run", s.label)));
    }
    let smoothed: Vec<Vec<f64>> = s.runs.iter().map(|r| smooth(&r[..n], window)).collect();
    let mut b = Band {
        mean: Vec::with_capacity(n),
        lo: Vec::with_capacity(n),
        hi: Vec::with_capacity(n),
    };
    for t in 0..n {
        let col = smoothed.iter().map(|r| r[t]);
        b.mean.push(col.clone().sum::<f64>() / smoothed.len() as f64);
        b.lo.push(col.clone().fold(f64::INFINITY, f64::min));
        b.hi.push(col.fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(b)
}

fn points(values: &[f64], stride: usize, x: impl Fn(usize) -> f64, y: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
    let mut idx: Vec<usize> = (0..values.len()).step_by(stride).collect();
    if idx.last() != Some(&(values.len() - 1)) {
        idx.push(values.len() - 1);
    }
    idx.into_iter().map(|i| (x(i), y(values[i]))).collect()
}

fn path(pts: &[(f64, f64)]) -> String {
    let mut d = String::new();
    for (i, (x, y)) in pts.iter().enumerate() {
        write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" }).unwrap();
    }
    d
}

/// Renders the curves of several agents on shared axes.
pub fn learning_curve_svg(series: &[Series], window: usize, title: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::input("nothing to plot"));
    }
    let bands = series.iter().map(|s| band(s, window)).collect::<Result<Vec<_>>>()?;
    let episodes = bands.iter().map(|b| b.mean.len()).max().unwrap();
    let mut y_min = bands.iter().flat_map(|b| &b.lo).cloned().fold(f64::INFINITY, f64::min);
    let mut y_max = bands.iter().flat_map(|b| &b.hi).cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(y_min.is_finite() && y_max.is_finite()) {
        return Err(Error::NonFinite("learning curve"));
    }
    if y_max - y_min < 1e-9 {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let x_of = |i: usize| MARGIN_LEFT + plot_w * if episodes > 1 { i as f64 / (episodes - 1) as f64 } else { 0.5 };
    let y_of = |v: f64| MARGIN_Y + plot_h * (y_max - v) / (y_max - y_min);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, MARGIN_LEFT + plot_w / 2.0, escape(title)).unwrap();
    // axes and ticks
    let (x0, x1, y0, y1) = (MARGIN_LEFT, MARGIN_LEFT + plot_w, MARGIN_Y, MARGIN_Y + plot_h);
    writeln!(svg, r#"<path d="M{x0},{y0} L{x0},{y1} L{x1},{y1}" fill="none" stroke="black"/>"#).unwrap();
    for k in 0..=4 {
        let v = y_min + (y_max - y_min) * k as f64 / 4.0;
        let y = y_of(v);
        writeln!(svg, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.1}</text>"#, x0 - 7.0, y + 4.0).unwrap();
    }
    for k in 0..=4 {
        let i = (episodes - 1) * k / 4;
        let x = x_of(i);
        writeln!(svg, r#"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y1 + 4.0).unwrap();
        writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y1 + 17.0, i + 1).unwrap();
    }
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">episode</text>"#, MARGIN_LEFT + plot_w / 2.0, HEIGHT - 6.0).unwrap();
    writeln!(
        svg,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">return (window {window})</text>"#,
        MARGIN_Y + plot_h / 2.0,
        MARGIN_Y + plot_h / 2.0
    )
    .unwrap();

    let stride = episodes.div_ceil(MAX_POINTS).max(1);
    for (k, (s, b)) in series.iter().zip(&bands).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if s.runs.len() > 1 {
            let mut outline = points(&b.hi, stride, x_of, y_of);
            let mut lower = points(&b.lo, stride, x_of, y_of);
            lower.reverse();
            outline.extend(lower);
            writeln!(svg, r#"<path d="{} Z" fill="{color}" fill-opacity="0.2" stroke="none"/>"#, path(&outline)).unwrap();
        }
        writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path(&points(&b.mean, stride, x_of, y_of))
        )
        .unwrap();
        let ly = MARGIN_Y + 10.0 + 18.0 * k as f64;
        writeln!(svg, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#, x1 + 12.0, x1 + 32.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{}">{} (n={})</text>"#, x1 + 38.0, ly + 4.0, escape(&s.label), s.runs.len()).unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn one_seed_draws_a_single_line() {
        let s = Series {
            label: "rm".into(),
            runs: vec![vec![0.0, 50.0, 100.0]],
        };
        let svg = learning_curve_svg(&[s], 100, "t").unwrap();
        assert_eq!(count(&svg, "fill-opacity"), 0);
        assert_eq!(count(&svg, r#"stroke-width="1.5""#), 1);
    }

    #[test]
    fn several_seeds_add_a_band() {
        let s = Series {
            label: "nrm".into(),
            runs: vec![vec![0.0, 100.0], vec![50.0, 50.0], vec![100.0, 0.0]],
        };
        let svg = learning_curve_svg(&[s], 1, "t").unwrap();
        assert_eq!(count(&svg, "fill-opacity"), 1);
        assert_eq!(count(&svg, r#"stroke-width="1.5""#), 1);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(learning_curve_svg(&[], 100, "t").is_err());
        let s = Series {
            label: "x".into(),
            runs: vec![vec![]],
        };
        assert!(learning_curve_svg(&[s], 100, "t").is_err());
    }

    #[test]
    fn title_is_escaped() {
        let s = Series {
            label: "a<b".into(),
            runs: vec![vec![1.0]],
        };
        let svg = learning_curve_svg(&[s], 100, "F(a) & F(b)").unwrap();
        assert!(svg.contains("F(a) &amp; F(b)") && svg.contains("a&lt;b"));
    }
}
