//! Rate-series CSV, tidy long-format plot CSVs, and the optional SVG line
//! chart rendered from rate series.

use std::str::FromStr;

use sicr_core::calendar::CalMonth;
use sicr_core::dataset::{RateKind, RatePoint, RateSeries};
use sicr_core::error::{Error, Result};
use sicr_core::Real;

use super::{check_field, expect_header, fmt6, parse_real, parse_usize, split_fields};

const RATES_HEADER: &str = "month,kind,n,events,rate";

/// Long-format header for per-definition rate plots: one row per
/// (month, series) pair.
pub const TIDY_RATES_HEADER: &str = "month,series,value";

/// Long-format header for the cross-definition metric plot data: one row per
/// (definition, metric) pair.
pub const TIDY_METRICS_HEADER: &str = "definition,metric,value";

pub fn rates_to_csv(series: &[&RateSeries]) -> String {
    let mut out = String::from(RATES_HEADER);
    out.push('\n');
    for s in series {
        for p in &s.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.month,
                s.kind.as_str(),
                p.n,
                fmt6(p.events),
                fmt6(p.rate)
            ));
        }
    }
    out
}

/// Rebuild the series list: consecutive rows with the same kind form one
/// series, in file order. Months within a series must be strictly ascending.
pub fn rates_from_csv(text: &str) -> Result<Vec<RateSeries>> {
    let mut lines = text.lines();
    expect_header(lines.next(), RATES_HEADER, "rates")?;

    let mut series: Vec<RateSeries> = Vec::new();
    for (i, line) in lines.enumerate() {
        let what = format!("rates row {}", i + 1);
        let f = split_fields(line, 5, &what)?;
        let month = CalMonth::from_str(f[0])?;
        let kind = RateKind::parse(f[1]).ok_or_else(|| Error::InvalidParameter {
            what: format!("{what}: unknown rate kind `{}`", f[1]),
        })?;
        let point = RatePoint {
            month,
            n: parse_usize(f[2], &what)?,
            events: parse_real(f[3], &what)?,
            rate: parse_real(f[4], &what)?,
        };
        match series.last_mut() {
            Some(s) if s.kind == kind => {
                if s.points.last().is_some_and(|prev| prev.month >= month) {
                    return Err(Error::InvalidParameter {
                        what: format!("{what}: months not strictly ascending within `{}`", f[1]),
                    });
                }
                s.points.push(point);
            }
            _ => series.push(RateSeries { kind, points: vec![point] }),
        }
    }
    Ok(series)
}

pub fn tidy_to_csv(header: &str, rows: &[(String, String, Real)]) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for (a, b, v) in rows {
        check_field(a, "tidy key");
        check_field(b, "tidy key");
        out.push_str(&format!("{a},{b},{}\n", fmt6(*v)));
    }
    out
}

pub fn tidy_from_csv(text: &str, header: &str) -> Result<Vec<(String, String, Real)>> {
    let mut lines = text.lines();
    expect_header(lines.next(), header, "tidy plot data")?;
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let what = format!("tidy row {}", i + 1);
        let f = split_fields(line, 3, &what)?;
        rows.push((f[0].to_string(), f[1].to_string(), parse_real(f[2], &what)?));
    }
    Ok(rows)
}

const PALETTE: [&str; 5] = ["#1f6fb4", "#c23b21", "#2c8c4b", "#8a5cb8", "#b8860b"];

const CHART_W: f64 = 960.0;
const CHART_H: f64 = 540.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 56.0;

/// Render named rate series as a self-contained SVG line chart. Output is a
/// pure function of the input, so reruns byte-match.
pub fn rate_chart_svg(title: &str, series: &[(&str, &RateSeries)]) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" \
         viewBox=\"0 0 {CHART_W} {CHART_H}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str(&format!(
        "  <rect width=\"{CHART_W}\" height=\"{CHART_H}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        CHART_W / 2.0,
        xml_escape(title)
    ));

    let points: Vec<&RatePoint> =
        series.iter().flat_map(|(_, s)| s.points.iter()).collect();
    let Some(first) = points.iter().map(|p| p.month).min() else {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">no data</text>\n",
            CHART_W / 2.0,
            CHART_H / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    };
    let last = points.iter().map(|p| p.month).max().unwrap();
    let span = (last - first).max(1) as f64;
    let max_rate = points.iter().map(|p| p.rate).fold(0.0, Real::max).max(1e-9);
    // Round the axis top up to a clean multiple of a decimal step.
    let y_top = {
        let raw_step = max_rate / 4.0;
        let mag = (10.0 as Real).powf(raw_step.log10().floor());
        let step = [1.0, 2.0, 2.5, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|&s| s >= raw_step)
            .unwrap();
        step * 5.0
    };

    let plot_w = CHART_W - MARGIN_L - MARGIN_R;
    let plot_h = CHART_H - MARGIN_T - MARGIN_B;
    let x_of = |m: CalMonth| MARGIN_L + (m - first) as f64 / span * plot_w;
    let y_of = |r: Real| MARGIN_T + (1.0 - r / y_top) * plot_h;

    // Axes and horizontal gridlines with y labels.
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"#333\"/>\n",
        MARGIN_T + plot_h
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#333\"/>\n",
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h
    ));
    for i in 0..=5 {
        let r = y_top * i as Real / 5.0;
        let y = y_of(r);
        if i > 0 {
            svg.push_str(&format!(
                "  <line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{}\" y2=\"{y:.1}\" \
                 stroke=\"#ddd\"/>\n",
                MARGIN_L + plot_w
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 8.0,
            y + 4.0,
            fmt_tick(r)
        ));
    }
    // X ticks: yearly if the span allows, thinned to at most ~10 labels.
    let n_months = (last - first) as usize + 1;
    let tick_step = n_months.div_ceil(10).max(1).next_multiple_of(12).min(n_months.max(1));
    let mut m = first;
    while m <= last {
        let x = x_of(m);
        svg.push_str(&format!(
            "  <line x1=\"{x:.1}\" y1=\"{}\" x2=\"{x:.1}\" y2=\"{}\" stroke=\"#333\"/>\n",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{x:.1}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{m}</text>\n",
            MARGIN_T + plot_h + 20.0
        ));
        m = m + tick_step as i32;
    }

    // One polyline per series plus a legend entry.
    for (i, (name, s)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !s.points.is_empty() {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|p| format!("{:.1},{:.1}", x_of(p.month), y_of(p.rate)))
                .collect();
            svg.push_str(&format!(
                "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
        let ly = MARGIN_T + 14.0 * i as f64;
        let lx = MARGIN_L + plot_w - 150.0;
        svg.push_str(&format!(
            "  <line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n",
            lx + 22.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
            lx + 28.0,
            ly + 4.0,
            xml_escape(name)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn fmt_tick(r: Real) -> String {
    let s = format!("{r:.4}");
    let s = s.trim_end_matches('0');
    let s = s.trim_end_matches('.');
    if s.is_empty() { "0".to_string() } else { s.to_string() }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
