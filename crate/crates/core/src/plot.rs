//! Two-panel SVG figure: statistic curves with the level-alpha envelope on
//! top, adjusted p-values on a log scale below.

use std::fmt::Write as _;

use crate::adjust::PvalueReport;
use crate::curves::CurveSet;
use crate::envelope::{build_envelope, Envelope, KappaTable};
use crate::error::{Error, Result};
use crate::pvalue::PValue;
use crate::ranks::{minrank_depths, pointwise_ranks};

const WIDTH: f64 = 800.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 780.0;
const TOP_PANEL: (f64, f64) = (40.0, 330.0);
const BOTTOM_PANEL: (f64, f64) = (400.0, 660.0);
const HEIGHT: f64 = 720.0;

const FAMILIES: [(&str, &str, &str); 3] = [
    ("single-step", "Single-step", "#1f77b4"),
    ("step-down", "Step-down", "#d62728"),
    ("erl", "ERL", "#2ca02c"),
];

/// Largest `j` with `kappa_j / M <= alpha` on the min-rank depths, and its envelope.
pub fn level_envelope(curves: &CurveSet, report: &PvalueReport, alpha: f64) -> Option<Envelope> {
    let ranks = pointwise_ranks(curves, report.direction);
    let kappa = KappaTable::new(&minrank_depths(&ranks));
    let m = curves.n_curves();
    let j = (1..=m)
        .rev()
        .find(|&j| kappa.get(j) > 0 && kappa.pvalue(j).at_most(alpha))?;
    let env = build_envelope(curves, &minrank_depths(&ranks), j);
    (!env.is_empty()).then_some(env)
}

struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, hi + 0.5)
        };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn path(xs: &[f64], ys: &[f64], x: &Axis, y: &Axis) -> String {
    let mut d = String::new();
    for (i, (&a, &b)) in xs.iter().zip(ys).enumerate() {
        let _ = write!(
            d,
            "{}{:.2},{:.2}",
            if i == 0 { "M" } else { " L" },
            x.map(a),
            y.map(b)
        );
    }
    d
}

fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

/// Renders the figure. `curves` and `report` must share the grid and `M`.
pub fn render_svg(curves: &CurveSet, report: &PvalueReport, alpha: f64) -> Result<String> {
    if curves.n_points() != report.grid.len() || curves.grid().points() != report.grid.points() {
        return Err(Error::DimensionMismatch(format!(
            "curves have {} grid points, report has {}",
            curves.n_points(),
            report.grid.len()
        )));
    }
    if curves.n_curves() != report.n_curves {
        return Err(Error::DimensionMismatch(format!(
            "curves have M = {}, report has M = {}",
            curves.n_curves(),
            report.n_curves
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }

    let grid = curves.grid().points();
    let m = curves.n_curves();
    let envelope = level_envelope(curves, report, alpha);

    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in curves.rows() {
        for &v in row {
            ymin = ymin.min(v);
            ymax = ymax.max(v);
        }
    }
    let pad = 0.05 * (ymax - ymin).max(1e-9);
    let x = Axis::new(grid[0], grid[grid.len() - 1], LEFT, RIGHT);
    let y = Axis::new(ymin - pad, ymax + pad, TOP_PANEL.1, TOP_PANEL.0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // panel 1
    let _ = writeln!(svg, r#"<g id="curves-panel">"#);
    frame(&mut svg, TOP_PANEL);
    x_ticks(&mut svg, &x, TOP_PANEL.1);
    for v in linear_ticks(y.lo, y.hi) {
        y_tick(&mut svg, y.map(v), &label(v));
    }
    for mi in 1..m {
        let _ = writeln!(
            svg,
            r##"<path class="curve permuted" d="{}" fill="none" stroke="#b0b0b0" stroke-width="0.6" stroke-opacity="0.6"/>"##,
            path(grid, curves.row(mi), &x, &y)
        );
    }
    let _ = writeln!(
        svg,
        r##"<path class="curve observed" d="{}" fill="none" stroke="black" stroke-width="2"/>"##,
        path(grid, curves.observed(), &x, &y)
    );
    match &envelope {
        Some(env) => {
            for bound in [&env.lower, &env.upper] {
                let _ = writeln!(
                    svg,
                    r##"<path class="envelope" d="{}" fill="none" stroke="black" stroke-width="1.2" stroke-dasharray="6,4"/>"##,
                    path(grid, bound, &x, &y)
                );
            }
            let _ = writeln!(
                svg,
                r#"<text x="{LEFT}" y="{:.2}">Envelope: kappa/M = {} &lt;= alpha = {}</text>"#,
                TOP_PANEL.0 - 10.0,
                PValue::new(env.kappa_j as usize, m),
                alpha
            );
        }
        None => {
            let _ = writeln!(
                svg,
                r##"<text class="warning" x="{LEFT}" y="{:.2}" fill="#d62728">Warning: no envelope at alpha = {} (smallest attainable kappa/M exceeds alpha)</text>"##,
                TOP_PANEL.0 - 10.0,
                alpha
            );
        }
    }
    let _ = writeln!(svg, "</g>");

    // panel 2
    let floor = (1.0 / m as f64).log10();
    let ly = Axis::new(floor, 0.0, BOTTOM_PANEL.1, BOTTOM_PANEL.0);
    let _ = writeln!(svg, r#"<g id="pvalue-panel">"#);
    frame(&mut svg, BOTTOM_PANEL);
    x_ticks(&mut svg, &x, BOTTOM_PANEL.1);
    let mut decade = 0i32;
    while decade as f64 >= floor {
        y_tick(&mut svg, ly.map(decade as f64), &label(10f64.powi(decade)));
        decade -= 1;
    }
    if alpha.log10() >= floor {
        let ay = ly.map(alpha.log10());
        let _ = writeln!(
            svg,
            r##"<line class="alpha-line" x1="{LEFT}" y1="{ay:.2}" x2="{RIGHT}" y2="{ay:.2}" stroke="#7f7f7f" stroke-dasharray="4,3"/>"##
        );
    }
    for (k, (class, name, color)) in FAMILIES.iter().enumerate() {
        let ps = match k {
            0 => &report.single_step,
            1 => &report.step_down,
            _ => &report.erl,
        };
        let logs: Vec<f64> = ps.iter().map(|p| p.value().log10()).collect();
        let _ = writeln!(
            svg,
            r#"<path class="pvalue {class}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path(grid, &logs, &x, &ly)
        );
        let ly_text = BOTTOM_PANEL.1 + 40.0;
        let lx = LEFT + 150.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly_text:.2}">{name}</text>"#,
            ly_text - 4.0,
            lx + 20.0,
            ly_text - 4.0,
            lx + 25.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{LEFT}" y="{:.2}">Adjusted p-values (log scale), reference line at alpha = {}</text>"#,
        BOTTOM_PANEL.0 - 10.0,
        alpha
    );
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn frame(svg: &mut String, (top, bottom): (f64, f64)) {
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        RIGHT - LEFT,
        bottom - top
    );
}

/// Round tick positions (steps of 1, 2 or 5 times a power of ten) inside `[lo, hi]`.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|f| f * magnitude)
        .find(|&st| st >= raw)
        .unwrap_or(10.0 * magnitude);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn x_ticks(svg: &mut String, x: &Axis, bottom: f64) {
    for v in linear_ticks(x.lo, x.hi) {
        let px = x.map(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{bottom:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 5.0,
            bottom + 18.0,
            label(v)
        );
    }
}

fn y_tick(svg: &mut String, py: f64, text: &str) {
    let _ = writeln!(
        svg,
        r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{text}</text>"#,
        LEFT - 5.0,
        LEFT - 8.0,
        py + 4.0
    );
}
