//! Deterministic SVG scatter plot of the 2-D cluster projection.

use std::fmt::Write as _;
use std::path::Path;

use newsimpact_core::cluster::Projection2D;

use crate::csvio::write_text;
use crate::error::{Error, Result};

pub const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 560.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

/// Tick spacing of 1, 2 or 5 times a power of ten giving about five ticks.
fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let frac = raw / mag;
    let nice = if frac <= 1.0 {
        1.0
    } else if frac <= 2.0 {
        2.0
    } else if frac <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

struct Axis {
    lo: f64,
    hi: f64,
    step: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>) -> Self {
        let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        if hi - lo < 1e-12 {
            lo -= 1.0;
            hi += 1.0;
        }
        let step = nice_step(hi - lo);
        Axis {
            lo: (lo / step).floor() * step,
            hi: (hi / step).ceil() * step,
            step,
        }
    }

    fn ticks(&self) -> Vec<f64> {
        let n = ((self.hi - self.lo) / self.step).round() as usize;
        (0..=n).map(|i| self.lo + i as f64 * self.step).collect()
    }

    fn decimals(&self) -> usize {
        (-self.step.log10().floor()).max(0.0) as usize
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn label(v: f64, decimals: usize) -> String {
    // adding 0.0 turns -0.0 into 0.0
    format!("{:.*}", decimals, v + 0.0)
}

/// Renders one circle per point colored by label, tick-labelled axes and a
/// legend naming `Topic 0` to `Topic k-1`.
pub fn render_scatter(
    points: &[[f64; 2]],
    labels: &[usize],
    k: usize,
    title: &str,
    axis_names: [&str; 2],
) -> Result<String> {
    if points.is_empty() {
        return Err(Error::Config("cannot plot an empty projection".into()));
    }
    if labels.len() != points.len() {
        return Err(newsimpact_core::Error::LengthMismatch {
            what: "plot labels",
            expected: points.len(),
            got: labels.len(),
        }
        .into());
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(newsimpact_core::Error::LabelOutOfRange { label: bad, k }.into());
    }
    let xa = Axis::new(points.iter().map(|p| p[0]));
    let ya = Axis::new(points.iter().map(|p| p[1]));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + xa.frac(v) * pw;
    let sy = |v: f64| TOP + (1.0 - ya.frac(v)) * ph;

    let mut s = String::new();
    let w = &mut s;
    // writing into a String cannot fail
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        w,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(w, r#"<g class="x-axis">"#);
    for t in xa.ticks() {
        let x = sx(t);
        let _ = writeln!(
            w,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 19.0,
            label(t, xa.decimals())
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text></g>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(axis_names[0])
    );
    let _ = writeln!(w, r#"<g class="y-axis">"#);
    for t in ya.ticks() {
        let y = sy(t);
        let _ = writeln!(
            w,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            label(t, ya.decimals())
        );
    }
    let _ = writeln!(
        w,
        r#"<text transform="translate(18 {:.1}) rotate(-90)" text-anchor="middle">{}</text></g>"#,
        TOP + ph / 2.0,
        escape(axis_names[1])
    );
    let _ = writeln!(w, r#"<g class="points">"#);
    for (p, &l) in points.iter().zip(labels) {
        let _ = writeln!(
            w,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{}" fill-opacity="0.8"/>"#,
            sx(p[0]),
            sy(p[1]),
            PALETTE[l % PALETTE.len()]
        );
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, r#"<g class="legend">"#);
    for topic in 0..k {
        let y = TOP + 10.0 + 20.0 * topic as f64;
        let _ = writeln!(
            w,
            r#"<rect x="{:.1}" y="{y:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">Topic {topic}</text>"#,
            WIDTH - RIGHT + 20.0,
            PALETTE[topic % PALETTE.len()],
            WIDTH - RIGHT + 38.0,
            y + 10.0
        );
    }
    let _ = writeln!(w, "</g>\n</svg>");
    Ok(s)
}

/// Writes the projection scatter plot with explained-variance axis titles.
pub fn write_plot(projection: &Projection2D, labels: &[usize], k: usize, path: &Path) -> Result<()> {
    let points: Vec<[f64; 2]> = projection
        .points
        .iter_rows()
        .map(|r| [r[0], r[1]])
        .collect();
    let [r1, r2] = projection.explained_variance_ratio;
    let x = format!("PC1 ({:.1}% of variance)", 100.0 * r1);
    let y = format!("PC2 ({:.1}% of variance)", 100.0 * r2);
    let svg = render_scatter(&points, labels, k, "Headline topics (PCA projection)", [&x, &y])?;
    write_text(path, &svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four() -> (Vec<[f64; 2]>, Vec<usize>) {
        (
            vec![[0.0, 0.0], [0.1, 0.2], [1.0, 1.1], [0.9, 1.0]],
            vec![0, 0, 1, 1],
        )
    }

    #[test]
    fn counts_circles_and_legend() {
        let (p, l) = four();
        let svg = render_scatter(&p, &l, 2, "t", ["x", "y"]).unwrap();
        assert_eq!(svg.matches("<circle").count(), 4);
        assert_eq!(svg.matches(">Topic ").count(), 2);
        assert!(svg.contains(PALETTE[0]) && svg.contains(PALETTE[1]));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn deterministic() {
        let (p, l) = four();
        let a = render_scatter(&p, &l, 2, "t", ["x", "y"]).unwrap();
        let b = render_scatter(&p, &l, 2, "t", ["x", "y"]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_and_mismatched_input() {
        assert!(render_scatter(&[], &[], 2, "t", ["x", "y"]).is_err());
        assert!(render_scatter(&[[0.0, 0.0]], &[], 2, "t", ["x", "y"]).is_err());
        assert!(render_scatter(&[[0.0, 0.0]], &[3], 2, "t", ["x", "y"]).is_err());
    }

    #[test]
    fn ticks_cover_data() {
        let a = Axis::new([-0.37, 0.81].into_iter());
        assert_eq!(a.step, 0.5);
        assert!(a.lo <= -0.37 && a.hi >= 0.81);
        assert_eq!(label(-0.0, 1), "0.0");
        let flat = Axis::new([2.0, 2.0].into_iter());
        assert!(flat.hi > flat.lo);
    }

    #[test]
    fn escapes_text() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
