//! Static SVG figures for the CLI experiments.

use plotters::coord::types::RangedCoordf64;
use plotters::prelude::*;

use crate::analysis::{OrderFit, SweepRow, Trajectory};
use crate::error::{Error, Result};

const SIZE: (u32, u32) = (900, 600);

fn palette(i: usize) -> RGBColor {
    const COLORS: [RGBColor; 8] = [
        RGBColor(31, 119, 180),
        RGBColor(214, 39, 40),
        RGBColor(44, 160, 44),
        RGBColor(255, 127, 14),
        RGBColor(148, 103, 189),
        RGBColor(140, 86, 75),
        RGBColor(227, 119, 194),
        RGBColor(127, 127, 127),
    ];
    COLORS[i % COLORS.len()]
}

fn draw_err<E: std::fmt::Debug>(e: E) -> Error {
    Error::Io(format!("plot: {e:?}"))
}

fn bounds<'a>(pts: impl IntoIterator<Item = &'a (f64, f64)>) -> Option<((f64, f64), (f64, f64))> {
    let mut it = pts.into_iter().filter(|(x, y)| x.is_finite() && y.is_finite()).peekable();
    it.peek()?;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in it {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    Some(((x0, x1), (y0, y1)))
}

fn pad(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    } else {
        let m = 0.5 * lo.abs().max(1.0);
        (lo - m, hi + m)
    }
}

fn pad_log(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo / 1.5, hi * 1.5)
    } else {
        (lo / 10.0, hi * 10.0)
    }
}

/// Each component and V against time, V on its own panel.
pub fn trajectory_svg(traj: &Trajectory, title: &str) -> Result<String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        let (top, bottom) = root.split_vertically(SIZE.1 / 2);
        let t = traj.times();
        let comps: Vec<Vec<(f64, f64)>> = (0..traj.dim())
            .map(|i| t.iter().copied().zip(traj.component(i)).collect())
            .collect();
        let v: Vec<(f64, f64)> = t.iter().copied().zip(traj.v_values().iter().copied()).collect();
        line_panel(&top, title, "y", &comps, &(1..=traj.dim()).map(|i| format!("y{i}")).collect::<Vec<_>>())?;
        line_panel(&bottom, "", "V", &[v], &["V".to_string()])?;
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}

fn line_panel(
    area: &DrawingArea<SVGBackend<'_>, plotters::coord::Shift>,
    title: &str,
    y_label: &str,
    series: &[Vec<(f64, f64)>],
    names: &[String],
) -> Result<()> {
    let Some(((x0, x1), (y0, y1))) = bounds(series.iter().flatten()) else {
        return Ok(());
    };
    let (x0, x1) = pad(x0, x1);
    let (y0, y1) = pad(y0, y1);
    let mut chart = ChartBuilder::on(area)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(draw_err)?;
    chart
        .configure_mesh()
        .x_desc("t")
        .y_desc(y_label)
        .draw()
        .map_err(draw_err)?;
    for (i, (s, name)) in series.iter().zip(names).enumerate() {
        let color = palette(i);
        chart
            .draw_series(LineSeries::new(thin(s, 20_000).into_iter().filter(|(_, y)| y.is_finite()), color))
            .map_err(draw_err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(draw_err)?;
    Ok(())
}

/// Wall time against step size on log-log axes, one line per method.
pub fn cost_svg(rows: &[SweepRow]) -> Result<String> {
    let mut methods: Vec<_> = rows.iter().map(|r| r.method).collect();
    methods.dedup();
    let series: Vec<(String, Vec<(f64, f64)>)> = methods
        .iter()
        .map(|m| {
            let mut pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.method == *m && r.wall_time_s > 0.0)
                .map(|r| (r.h, r.wall_time_s))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (m.name().to_string(), pts)
        })
        .collect();
    loglog_svg("Computational cost", "h", "wall time [s]", &series, &[])
}

/// A named `(h, error)` series with its fitted order, if any.
pub type OrderSeries = (String, Vec<(f64, f64)>, Option<OrderFit>);

/// Global error against step size with fitted slopes and slope-1/slope-2
/// guide lines.
pub fn order_svg(fits: &[OrderSeries]) -> Result<String> {
    let series: Vec<(String, Vec<(f64, f64)>)> = fits
        .iter()
        .map(|(name, pairs, fit)| {
            let label = match fit {
                Some(f) => format!("{name} (slope {:.2})", f.slope),
                None => name.clone(),
            };
            (label, pairs.iter().copied().filter(|(_, e)| *e > 0.0 && e.is_finite()).collect())
        })
        .collect();
    let anchor = series.iter().flat_map(|(_, p)| p.iter()).copied().next();
    let guides: Vec<(String, f64, (f64, f64))> = match anchor {
        Some(a) => vec![("slope 1".into(), 1.0, a), ("slope 2".into(), 2.0, a)],
        None => Vec::new(),
    };
    loglog_svg("Convergence order", "h", "global error", &series, &guides)
}

fn loglog_svg(
    title: &str,
    x_desc: &str,
    y_desc: &str,
    series: &[(String, Vec<(f64, f64)>)],
    guides: &[(String, f64, (f64, f64))],
) -> Result<String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        if let Some(((x0, x1), (y0, y1))) = bounds(series.iter().flat_map(|(_, p)| p.iter())) {
            let (x0, x1) = pad_log(x0, x1);
            let (y0, y1) = pad_log(y0, y1);
            let mut chart = ChartBuilder::on(&root)
                .caption(title, ("sans-serif", 22))
                .margin(15)
                .x_label_area_size(40)
                .y_label_area_size(70)
                .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
                .map_err(draw_err)?;
            chart
                .configure_mesh()
                .x_desc(x_desc)
                .y_desc(y_desc)
                .x_label_formatter(&|x| format!("{x:.0e}"))
                .y_label_formatter(&|y| format!("{y:.0e}"))
                .draw()
                .map_err(draw_err)?;
            for (i, (name, pts)) in series.iter().enumerate() {
                let color = palette(i);
                chart
                    .draw_series(LineSeries::new(pts.iter().copied(), color))
                    .map_err(draw_err)?
                    .label(name.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
                chart
                    .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
                    .map_err(draw_err)?;
            }
            for (name, slope, (hx, ey)) in guides {
                let line = [x0, x1].map(|x| (x, ey * (x / hx).powf(*slope)));
                chart
                    .draw_series(LineSeries::new(line, BLACK.mix(0.4).stroke_width(1)))
                    .map_err(draw_err)?
                    .label(name.as_str())
                    .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], BLACK.mix(0.4)));
            }
            chart
                .configure_series_labels()
                .position(SeriesLabelPosition::LowerRight)
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(draw_err)?;
        }
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}

/// `y2` against `y1` for each trajectory, with an optional reference curve.
pub fn phase_svg(curves: &[(String, &Trajectory)], reference: Option<&Trajectory>) -> Result<String> {
    let to_points = |t: &Trajectory| -> Vec<(f64, f64)> { t.states().map(|y| (y[0], y[1])).collect() };
    let mut series: Vec<(String, Vec<(f64, f64)>)> =
        curves.iter().map(|(n, t)| (n.clone(), to_points(t))).collect();
    if let Some(r) = reference {
        series.push(("reference".into(), to_points(r)));
    }
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (800, 800)).into_drawing_area();
        root.fill(&WHITE).map_err(draw_err)?;
        if let Some(((x0, x1), (y0, y1))) = bounds(series.iter().flat_map(|(_, p)| p.iter())) {
            let (x0, x1) = pad(x0, x1);
            let (y0, y1) = pad(y0, y1);
            let mut chart: ChartContext<'_, SVGBackend<'_>, Cartesian2d<RangedCoordf64, RangedCoordf64>> =
                ChartBuilder::on(&root)
                    .caption("Phase portrait", ("sans-serif", 22))
                    .margin(15)
                    .x_label_area_size(40)
                    .y_label_area_size(60)
                    .build_cartesian_2d(x0..x1, y0..y1)
                    .map_err(draw_err)?;
            chart
                .configure_mesh()
                .x_desc("y1")
                .y_desc("y2")
                .draw()
                .map_err(draw_err)?;
            let n = series.len();
            for (i, (name, pts)) in series.iter().enumerate() {
                let is_ref = reference.is_some() && i == n - 1;
                let color = if is_ref { BLACK } else { palette(i) };
                let style = if is_ref {
                    color.mix(0.6).stroke_width(1)
                } else {
                    color.stroke_width(2)
                };
                chart
                    .draw_series(LineSeries::new(thin(pts, 20_000), style))
                    .map_err(draw_err)?
                    .label(name.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(draw_err)?;
        }
        root.present().map_err(draw_err)?;
    }
    Ok(svg)
}

/// At most about `max` evenly strided points, always keeping the last one.
fn thin(pts: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    let stride = pts.len().div_ceil(max.max(1)).max(1);
    let mut out: Vec<_> = pts.iter().copied().step_by(stride).collect();
    if let Some(&last) = pts.last() {
        if out.last() != Some(&last) {
            out.push(last);
        }
    }
    out
}
