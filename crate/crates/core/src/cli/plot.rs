//! Static SVG polyline charts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::sim::TrajectoryLog;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const MAX_POINTS: usize = 2000;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

#[derive(Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Vertical guide lines (e.g. reschedule rounds).
    pub vlines: Vec<f64>,
    /// Marked points: (x, y, fill colour).
    pub markers: Vec<(f64, f64, &'static str)>,
}

struct Extent {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Extent {
    fn of(chart: &Chart) -> Self {
        let mut e = Extent {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        let pts = chart
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(chart.markers.iter().map(|m| (m.0, m.1)));
        for (x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            e.x0 = e.x0.min(x);
            e.x1 = e.x1.max(x);
            e.y0 = e.y0.min(y);
            e.y1 = e.y1.max(y);
        }
        if !e.x0.is_finite() {
            return Extent {
                x0: 0.0,
                x1: 1.0,
                y0: 0.0,
                y1: 1.0,
            };
        }
        let pad = |lo: &mut f64, hi: &mut f64| {
            let span = *hi - *lo;
            let p = if span > 0.0 {
                0.05 * span
            } else {
                0.5_f64.max(lo.abs() * 0.05)
            };
            *lo -= p;
            *hi += p;
        };
        pad(&mut e.y0, &mut e.y1);
        if e.x1 == e.x0 {
            pad(&mut e.x0, &mut e.x1);
        }
        e
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn thin(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points.to_vec();
    }
    let step = points.len().div_ceil(MAX_POINTS);
    let mut out: Vec<_> = points.iter().step_by(step).copied().collect();
    if out.last() != points.last() {
        out.push(*points.last().expect("non-empty"));
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let e = Extent::of(self);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let (l, r) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (t, b) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
        let _ = writeln!(
            s,
            r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        );
        for fx in ticks(e.x0, e.x1) {
            let x = e.px(fx);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{}" stroke="black"/>"#,
                b + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
                b + 18.0,
                tick(fx)
            );
        }
        for fy in ticks(e.y0, e.y1) {
            let y = e.py(fy);
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/>"#,
                l - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                l - 8.0,
                y + 4.0,
                tick(fy)
            );
        }
        for &v in &self.vlines {
            let x = e.px(v);
            let _ = writeln!(
                s,
                r##"<line x1="{x:.2}" y1="{t}" x2="{x:.2}" y2="{b}" stroke="#999" stroke-dasharray="4 4"/>"##
            );
        }
        for (i, series) in self.series.iter().enumerate() {
            let colour = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = thin(&series.points)
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", e.px(x), e.py(y)))
                .collect();
            let dash = if series.dashed {
                r#" stroke-dasharray="6 3""#
            } else {
                ""
            };
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            );
            let ly = t + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"{dash}/>"#,
                r + 10.0,
                r + 30.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}">{}</text>"#,
                r + 35.0,
                ly + 4.0,
                escape(&series.label)
            );
        }
        for &(x, y, fill) in &self.markers {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{fill}" stroke="black"/>"#,
                e.px(x),
                e.py(y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            (l + r) / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (l + r) / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            (t + b) / 2.0,
            escape(&self.y_label)
        );
        s.push_str("</svg>\n");
        s
    }
}

/// Tick positions at 1, 2 or 5 times a power of ten, four to eight per axis.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 8.0;
    if !(raw > 0.0 && raw.is_finite()) {
        return vec![lo];
    }
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e5).contains(&v.abs()) {
        format!("{:.3}", v)
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn rounds(log: &TrajectoryLog) -> impl Iterator<Item = f64> + '_ {
    log.records.iter().map(|r| r.round as f64)
}

/// One series per (agent, component) of the field selected by `pick`.
fn per_component(
    log: &TrajectoryLog,
    name: &str,
    width: impl Fn(usize) -> usize,
    pick: impl Fn(&crate::sim::AgentRecord) -> &[f64],
) -> Vec<Series> {
    let n_agents = log.records.first().map_or(0, |r| r.agents.len());
    let mut out = Vec::new();
    for i in 0..n_agents {
        for c in 0..width(i) {
            out.push(Series {
                label: format!("{name}{i}[{c}]"),
                points: rounds(log)
                    .zip(log.records.iter().map(|r| pick(&r.agents[i])[c]))
                    .collect(),
                dashed: c % 2 == 1,
            });
        }
    }
    out
}

pub fn output_plane_chart(log: &TrajectoryLog, reschedule_rounds: &[usize]) -> Chart {
    let n_agents = log.records.first().map_or(0, |r| r.agents.len());
    if log.dim < 2 {
        return Chart {
            title: "Outputs".into(),
            x_label: "round".into(),
            y_label: "y".into(),
            series: per_component(log, "y", |_| log.dim, |a| &a.y),
            vlines: reschedule_rounds.iter().map(|&r| r as f64).collect(),
            markers: Vec::new(),
        };
    }
    let mut chart = Chart {
        title: "Output trajectories (y[0], y[1])".into(),
        x_label: "y[0]".into(),
        y_label: "y[1]".into(),
        ..Chart::default()
    };
    for i in 0..n_agents {
        chart.series.push(Series {
            label: format!("agent {i}"),
            points: log
                .records
                .iter()
                .map(|r| (r.agents[i].y[0], r.agents[i].y[1]))
                .collect(),
            dashed: false,
        });
        if let (Some(first), Some(last)) = (log.records.first(), log.records.last()) {
            chart
                .markers
                .push((first.agents[i].y[0], first.agents[i].y[1], "black"));
            chart.markers.push((last.agents[i].y[0], last.agents[i].y[1], "red"));
        }
    }
    chart
}

pub fn outputs_vs_round_chart(log: &TrajectoryLog, reschedule_rounds: &[usize]) -> Chart {
    let mut series = per_component(log, "y", |_| log.dim, |a| &a.y);
    for c in 0..log.dim {
        series.push(Series {
            label: format!("y*[{c}]"),
            points: rounds(log).zip(log.records.iter().map(|r| r.optimum[c])).collect(),
            dashed: true,
        });
    }
    Chart {
        title: "Outputs per axis".into(),
        x_label: "round".into(),
        y_label: "y".into(),
        series,
        vlines: reschedule_rounds.iter().map(|&r| r as f64).collect(),
        markers: Vec::new(),
    }
}

pub fn states_chart(log: &TrajectoryLog, reschedule_rounds: &[usize]) -> Chart {
    Chart {
        title: "Agent states".into(),
        x_label: "round".into(),
        y_label: "x".into(),
        series: per_component(log, "x", |i| log.state_dims[i], |a| &a.x),
        vlines: reschedule_rounds.iter().map(|&r| r as f64).collect(),
        markers: Vec::new(),
    }
}

pub fn multipliers_chart(log: &TrajectoryLog, reschedule_rounds: &[usize]) -> Chart {
    Chart {
        title: "Multipliers".into(),
        x_label: "round".into(),
        y_label: "lambda".into(),
        series: per_component(log, "lambda", |_| log.dim, |a| &a.lambda),
        vlines: reschedule_rounds.iter().map(|&r| r as f64).collect(),
        markers: Vec::new(),
    }
}

/// Writes the four charts into `dir`, returning the paths written.
pub fn write_plots(log: &TrajectoryLog, reschedule_rounds: &[usize], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let charts = [
        ("output_plane.svg", output_plane_chart(log, reschedule_rounds)),
        ("outputs.svg", outputs_vs_round_chart(log, reschedule_rounds)),
        ("states.svg", states_chart(log, reschedule_rounds)),
        ("multipliers.svg", multipliers_chart(log, reschedule_rounds)),
    ];
    let mut paths = Vec::with_capacity(charts.len());
    for (name, chart) in charts {
        let path = dir.join(name);
        std::fs::write(&path, chart.to_svg())?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viewport_maps_extents_to_plot_area() {
        let chart = Chart {
            series: vec![Series {
                label: "a".into(),
                points: vec![(0.0, 0.0), (10.0, 1.0)],
                dashed: false,
            }],
            ..Chart::default()
        };
        let e = Extent::of(&chart);
        assert_eq!(e.px(0.0), MARGIN_LEFT);
        assert_eq!(e.px(10.0), WIDTH - MARGIN_RIGHT);
        assert!(e.py(0.0) < HEIGHT - MARGIN_BOTTOM && e.py(1.0) > MARGIN_TOP);
        let svg = chart.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn ticks_are_round_numbers_inside_range() {
        assert_eq!(ticks(-0.2, 4200.0), vec![0.0, 1000.0, 2000.0, 3000.0, 4000.0]);
        assert_eq!(ticks(-1.45, 12.64), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        assert_eq!(ticks(-1.45, 9.0), vec![0.0, 2.0, 4.0, 6.0, 8.0]);
        assert_eq!(ticks(1.0, 1.0), vec![1.0]);
    }

    #[test]
    fn thinning_keeps_endpoints() {
        let pts: Vec<(f64, f64)> = (0..10_001).map(|k| (k as f64, 0.0)).collect();
        let t = thin(&pts);
        assert!(t.len() <= MAX_POINTS + 1);
        assert_eq!(t.first(), pts.first());
        assert_eq!(t.last(), pts.last());
    }

    #[test]
    fn degenerate_extent_is_padded() {
        let chart = Chart {
            series: vec![Series {
                label: "flat".into(),
                points: vec![(3.0, 2.0)],
                dashed: false,
            }],
            ..Chart::default()
        };
        let e = Extent::of(&chart);
        assert!(e.x1 > e.x0 && e.y1 > e.y0);
        assert!(e.px(3.0).is_finite() && e.py(2.0).is_finite());
    }
}
