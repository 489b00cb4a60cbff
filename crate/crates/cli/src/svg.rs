//! Minimal SVG 1.1 line charts of sweep results. Every marker carries the
//! exact CSV text of the value it plots in `data-alpha-d` / `data-value`.

use std::fmt::Write as _;

use crate::record::{csv_value, format_number, SweepRecord};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub const DEFENSE_FILE: &str = "defense_vs_alpha.svg";
pub const ATTACK_FILE: &str = "attack_vs_alpha.svg";
pub const LOSS_FILE: &str = "loss_vs_alpha.svg";

struct Point {
    alpha: f64,
    value: f64,
    converged: bool,
}

struct Series {
    label: String,
    points: Vec<Point>,
}

/// Series are keyed by asset (and by α_A when the sweep has several).
fn series_by_asset(records: &[SweepRecord], pick: impl Fn(&SweepRecord) -> &[f64], symbol: &str) -> Vec<Series> {
    let alpha_as = distinct_alpha_a(records);
    let n = records.first().map_or(0, |r| r.x.len());
    let mut series = Vec::new();
    for &alpha_a in &alpha_as {
        for i in 0..n {
            let label = if alpha_as.len() > 1 {
                format!("{symbol}_{} (α_A={})", i + 1, format_number(alpha_a))
            } else {
                format!("{symbol}_{}", i + 1)
            };
            let points = records
                .iter()
                .filter(|r| r.alpha_a == alpha_a)
                .map(|r| Point { alpha: r.alpha_d, value: pick(r)[i], converged: r.converged })
                .collect();
            series.push(Series { label, points });
        }
    }
    series
}

fn distinct_alpha_a(records: &[SweepRecord]) -> Vec<f64> {
    let mut values: Vec<f64> = Vec::new();
    for r in records {
        if !values.contains(&r.alpha_a) {
            values.push(r.alpha_a);
        }
    }
    values
}

pub fn defense_chart(records: &[SweepRecord]) -> String {
    render("Defense investment at equilibrium", "x*", &series_by_asset(records, |r| &r.x, "x"))
}

pub fn attack_chart(records: &[SweepRecord]) -> String {
    render("Attack investment at equilibrium", "y*", &series_by_asset(records, |r| &r.y, "y"))
}

pub fn loss_chart(records: &[SweepRecord], zero_inherent: bool) -> String {
    let alpha_as = distinct_alpha_a(records);
    let series: Vec<Series> = alpha_as
        .iter()
        .map(|&alpha_a| Series {
            label: if alpha_as.len() > 1 { format!("E_T (α_A={})", format_number(alpha_a)) } else { "E_T".into() },
            points: records
                .iter()
                .filter(|r| r.alpha_a == alpha_a)
                .map(|r| Point { alpha: r.alpha_d, value: r.loss(zero_inherent), converged: r.converged })
                .collect(),
        })
        .collect();
    let axis = if zero_inherent { "E_T (a = 0)" } else { "E_T" };
    render("True expected loss at equilibrium", axis, &series)
}

fn padded_range(values: impl Iterator<Item = f64> + Clone, pad: f64, flat_pad: f64) -> (f64, f64) {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * hi.abs().max(1.0) {
        return (lo - flat_pad, hi + flat_pad);
    }
    let margin = pad * (hi - lo);
    (lo - margin, hi + margin)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn render(title: &str, y_label: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x_lo, x_hi) = padded_range(all().map(|p| csv_value(p.alpha)), 0.0, 0.05);
    let (y_lo, y_hi) = padded_range(all().map(|p| csv_value(p.value)), 0.05, 1.0);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{title}</text>"#, LEFT + plot_w / 2.0)
        .unwrap();
    writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#)
        .unwrap();

    for k in 0..=5 {
        let t = k as f64 / 5.0;
        let xv = x_lo + t * (x_hi - x_lo);
        let yv = y_lo + t * (y_hi - y_lo);
        let (px, py) = (sx(xv), sy(yv));
        writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{}" x2="{px:.2}" y2="{}" stroke="#000"/>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 20.0,
            tick_label(xv)
        )
        .unwrap();
        writeln!(svg, r##"<line x1="{}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="#000"/>"##, LEFT - 5.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, py + 4.0, tick_label(yv))
            .unwrap();
    }
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">α_D</text>"#, LEFT + plot_w / 2.0, HEIGHT - 25.0)
        .unwrap();
    writeln!(
        svg,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{y_label}</text>"#,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (index, s) in series.iter().enumerate() {
        let color = PALETTE[index % PALETTE.len()];
        let path: Vec<String> =
            s.points.iter().map(|p| format!("{:.2},{:.2}", sx(csv_value(p.alpha)), sy(csv_value(p.value)))).collect();
        writeln!(svg, r#"<g class="series" data-label="{}">"#, s.label).unwrap();
        writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, path.join(" "))
            .unwrap();
        for p in &s.points {
            let (cx, cy) = (sx(csv_value(p.alpha)), sy(csv_value(p.value)));
            let fill = if p.converged { color } else { "none" };
            writeln!(
                svg,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{fill}" stroke="{color}" data-alpha-d="{}" data-value="{}" data-converged="{}"/>"#,
                format_number(p.alpha),
                format_number(p.value),
                p.converged
            )
            .unwrap();
        }
        writeln!(svg, "</g>").unwrap();
        let ly = TOP + 10.0 + 20.0 * index as f64;
        let lx = WIDTH - RIGHT + 15.0;
        writeln!(svg, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 25.0)
            .unwrap();
        writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, lx + 32.0, ly + 4.0, s.label).unwrap();
    }

    if series.iter().flat_map(|s| &s.points).any(|p| !p.converged) {
        writeln!(
            svg,
            r##"<text x="{LEFT}" y="{}" fill="#d62728">hollow markers: best-response dynamics did not converge</text>"##,
            HEIGHT - 8.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
