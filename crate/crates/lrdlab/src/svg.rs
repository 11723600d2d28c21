//! Minimal self-contained SVG plots. Every plot embeds its data points in
//! a leading XML comment so the artifact is reproducible without the
//! binary that made it.

use crate::regimes::{self, LimitRegime};

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 50.0;

fn header(title: &str, data_comment: &str, timestamp: Option<&str>) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    s.push_str(&format!("<!-- data: {data_comment} -->\n"));
    if let Some(ts) = timestamp {
        s.push_str(&format!("<!-- generated: {ts} -->\n"));
    }
    s.push_str(&format!(
        "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W / 2.0
    ));
    s
}

fn axis_box() -> String {
    format!(
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    )
}

fn to_px(x: f64, lo: f64, hi: f64, flip: bool) -> f64 {
    let frac = if hi > lo { (x - lo) / (hi - lo) } else { 0.5 };
    if flip {
        H - PAD - frac * (H - 2.0 * PAD)
    } else {
        PAD + frac * (W - 2.0 * PAD)
    }
}

fn histogram(sample: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut counts = vec![0.0; bins];
    let width = (hi - lo) / bins as f64;
    for &v in sample {
        if v >= lo && v < hi {
            counts[((v - lo) / width) as usize] += 1.0;
        }
    }
    let norm = sample.len() as f64 * width;
    counts.iter().map(|c| c / norm).collect()
}

/// Overlaid density histograms of two samples, clipped to the central
/// quantile range of the first.
pub fn histogram_overlay(
    a: &[f64],
    b: &[f64],
    bins: usize,
    title: &str,
    timestamp: Option<&str>,
) -> String {
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let lo = sorted[sorted.len() / 100];
    let hi = sorted[sorted.len() - 1 - sorted.len() / 100];
    let ha = histogram(a, lo, hi, bins);
    let hb = histogram(b, lo, hi, bins);
    let ymax = ha.iter().chain(&hb).fold(0.0f64, |m, &v| m.max(v)) * 1.05;
    let data = format!("range=[{lo},{hi}] bins={bins} a={ha:?} b={hb:?}");
    let mut s = header(title, &data, timestamp);
    s.push_str(&axis_box());
    let bw = (W - 2.0 * PAD) / bins as f64;
    for (hist, color, opacity) in [(&ha, "steelblue", 0.6), (&hb, "indianred", 0.5)] {
        for (i, &v) in hist.iter().enumerate() {
            let x = PAD + i as f64 * bw;
            let y = to_px(v, 0.0, ymax, true);
            s.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bw:.2}\" height=\"{:.2}\" fill=\"{color}\" fill-opacity=\"{opacity}\"/>\n",
                H - PAD - y
            ));
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Points on log-log axes plus an optional reference line of given slope
/// through the first point.
pub fn log_log_plot(
    points: &[(f64, f64)],
    ref_slope: Option<f64>,
    title: &str,
    timestamp: Option<&str>,
) -> String {
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (x0, x1) = (lx.iter().cloned().fold(f64::MAX, f64::min), lx.iter().cloned().fold(f64::MIN, f64::max));
    let (y0, y1) = (ly.iter().cloned().fold(f64::MAX, f64::min), ly.iter().cloned().fold(f64::MIN, f64::max));
    let data = format!("points={points:?} ref_slope={ref_slope:?}");
    let mut s = header(title, &data, timestamp);
    s.push_str(&axis_box());
    for (&x, &y) in lx.iter().zip(&ly) {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n",
            to_px(x, x0, x1, false),
            to_px(y, y0, y1, true)
        ));
    }
    if let Some(m) = ref_slope {
        let ya = ly[0];
        let yb = ly[0] + m * (x1 - lx[0]);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n",
            to_px(lx[0], x0, x1, false),
            to_px(ya, y0, y1, true),
            to_px(x1, x0, x1, false),
            to_px(yb, y0, y1, true)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Regime map over the (H, alpha) plane for a fixed Hermite rank.
pub fn regime_map(kappa: usize, resolution: usize, title: &str, timestamp: Option<&str>) -> String {
    let mut labels = Vec::new();
    let mut s = String::new();
    let cell_w = (W - 2.0 * PAD) / resolution as f64;
    let cell_h = (H - 2.0 * PAD) / resolution as f64;
    for i in 0..resolution {
        let h = 0.5 + (i as f64 + 0.5) / resolution as f64 * 0.5;
        for j in 0..resolution {
            let alpha = (j as f64 + 0.5) / resolution as f64 * 2.0;
            let regime = regimes::classify(Some(kappa), h, alpha.max(1e-3), 1.0);
            let (label, color) = match regime {
                Ok(LimitRegime::HermiteLimit { .. }) => ("hermite", "#4878b0"),
                Ok(LimitRegime::MixedLimit { .. }) => ("mixed", "#9467bd"),
                Ok(LimitRegime::StableLimit { .. }) => ("stable", "#d65f5f"),
                Ok(LimitRegime::ShortMemoryStable { .. }) => ("short", "#e8a33d"),
                Ok(LimitRegime::FiniteVarianceOutOfScope) => ("finite", "#aaaaaa"),
                Err(_) => ("na", "#eeeeee"),
            };
            labels.push(format!("({h:.3},{alpha:.3})={label}"));
            let x = PAD + j as f64 * cell_w;
            let y = H - PAD - (i as f64 + 1.0) * cell_h;
            s.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{cell_w:.2}\" height=\"{cell_h:.2}\" fill=\"{color}\"/>\n"
            ));
        }
    }
    let mut out = header(title, &labels.join(" "), timestamp);
    out.push_str(&s);
    out.push_str(&axis_box());
    out.push_str("</svg>\n");
    out
}
