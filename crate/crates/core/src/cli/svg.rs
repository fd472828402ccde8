//! Static SVG line charts: one panel for humans, one for mosquitoes.

use std::fmt::Write;

use crate::integrator::Trajectory;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 320.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#d62728", "#2ca02c"];

struct Series<'a> {
    label: &'a str,
    values: Vec<f64>,
}

/// Two stacked panels (S_h, E_h, I_h, R_h) and (A_m, S_m, E_m, I_m) over time.
pub fn render_trajectory_svg(tr: &Trajectory, title: &str) -> String {
    let column = |i: usize| -> Vec<f64> { tr.states.iter().map(|s| s.to_array()[i]).collect() };
    let humans: Vec<Series> = ["S_h", "E_h", "I_h", "R_h"]
        .iter()
        .enumerate()
        .map(|(i, l)| Series {
            label: l,
            values: column(i),
        })
        .collect();
    let mosquitoes: Vec<Series> = ["A_m", "S_m", "E_m", "I_m"]
        .iter()
        .enumerate()
        .map(|(i, l)| Series {
            label: l,
            values: column(i + 4),
        })
        .collect();

    let total_height = 2.0 * PANEL_HEIGHT + 30.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{total_height}" viewBox="0 0 {WIDTH} {total_height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    panel(&mut svg, &tr.times, &humans, "Humans", 20.0);
    panel(
        &mut svg,
        &tr.times,
        &mosquitoes,
        "Mosquitoes",
        20.0 + PANEL_HEIGHT + 10.0,
    );
    svg.push_str("</svg>\n");
    svg
}

fn panel(svg: &mut String, times: &[f64], series: &[Series], name: &str, y0: f64) {
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let left = MARGIN_LEFT;
    let top = y0 + MARGIN_TOP;

    let (t_min, t_max) = bounds(times.iter().copied());
    let (v_min, v_max) = bounds(series.iter().flat_map(|s| s.values.iter().copied()));
    let v_min = v_min.min(0.0);
    let (t_ticks, t_lo, t_hi) = nice_ticks(t_min, t_max);
    let (v_ticks, v_lo, v_hi) = nice_ticks(v_min, v_max);
    let sx = |t: f64| left + (t - t_lo) / (t_hi - t_lo) * plot_w;
    let sy = |v: f64| top + plot_h - (v - v_lo) / (v_hi - v_lo) * plot_h;

    let _ = writeln!(svg, r#"<g class="panel" id="{}">"#, name.to_lowercase());
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{name}</text>"#,
        left + plot_w / 2.0,
        top - 8.0
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##
    );
    for t in &t_ticks {
        let x = sx(*t);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top,
            top + plot_h,
            top + plot_h + 16.0,
            tick_label(*t)
        );
    }
    for v in &v_ticks {
        let y = sy(*v);
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + plot_w,
            left - 6.0,
            y + 4.0,
            tick_label(*v)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">time (days)</text>"#,
        left + plot_w / 2.0,
        top + plot_h + 36.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let points: Vec<String> = times
            .iter()
            .zip(&s.values)
            .map(|(t, v)| format!("{:.2},{:.2}", sx(*t), sy(*v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + plot_w + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</g>\n");
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        (lo - 0.5 * lo.abs().max(1.0), hi + 0.5 * hi.abs().max(1.0))
    } else {
        (lo, hi)
    }
}

/// Round tick positions covering [lo, hi]; returns (ticks, axis_lo, axis_hi).
fn nice_ticks(lo: f64, hi: f64) -> (Vec<f64>, f64, f64) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() * step;
    let end = (hi / step).ceil() * step;
    let n = ((end - start) / step).round() as usize;
    let ticks = (0..=n).map(|i| start + i as f64 * step).collect();
    (ticks, start, end)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if a >= 1e6 {
        format!("{:.2}M", v / 1e6)
    } else if a >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if a >= 1.0 {
        format!("{}", (v * 100.0).round() / 100.0)
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
