//! Static SVG figures: loss curves on a log axis and 2D paths over filled
//! contours.

use std::path::Path;

use plotters::prelude::*;
use spiopt_core::{Error, Objective, ParamVector, Trajectory};

pub const CONTOUR_LEVELS: usize = 30;
pub const CONTOUR_GRID: usize = 90;
const SIZE: (u32, u32) = (720, 540);

fn plot_err<E: std::fmt::Debug>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e:?}", path.display()))
}

/// Loss-gap curves, one per optimizer, with a logarithmic ordinate.
pub fn loss_plot(path: &Path, title: &str, series: &[(String, Vec<f64>)]) -> spiopt_core::Result<()> {
    let err = plot_err(path);
    let floor = 1e-30;
    let finite: Vec<f64> = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .filter(|v| v.is_finite())
        .map(|v| v.max(floor))
        .collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0);
    let hi = finite.iter().cloned().fold(0.0, f64::max).max(lo * 10.0);
    let steps = series.iter().map(|(_, v)| v.len()).max().unwrap_or(1).max(2) - 1;

    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("{title}: |f - f*|"), ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(64)
        .build_cartesian_2d(0f64..steps as f64, (lo..hi).log_scale())
        .map_err(&err)?;
    chart
        .configure_mesh()
        .x_desc("step")
        .y_desc("loss gap")
        .draw()
        .map_err(&err)?;
    for (i, (label, values)) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        let points = values
            .iter()
            .enumerate()
            .take_while(|(_, v)| v.is_finite())
            .map(|(t, v)| (t as f64, v.clamp(lo, hi)));
        chart
            .draw_series(LineSeries::new(points, color.stroke_width(2)))
            .map_err(&err)?
            .label(label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(&err)?;
    root.present().map_err(&err)?;
    Ok(())
}

/// Objective values on a regular grid with quantile contour levels.
#[derive(Debug, Clone)]
pub struct ContourField {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub n: usize,
    /// Level index per cell, row-major with rows along y.
    pub level: Vec<usize>,
}

impl ContourField {
    pub fn sample(objective: &dyn Objective, domain: &[(f64, f64)], n: usize) -> Self {
        let (x, y) = (domain[0], domain[1]);
        let cell = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * (i as f64 + 0.5) / n as f64;
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                values.push(objective.value(&ParamVector::from([cell(x.0, x.1, i), cell(y.0, y.1, j)])));
            }
        }
        let mut sorted: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        sorted.sort_by(f64::total_cmp);
        let thresholds: Vec<f64> = (1..CONTOUR_LEVELS)
            .map(|k| sorted[(k * sorted.len() / CONTOUR_LEVELS).min(sorted.len() - 1)])
            .collect();
        let level = values.iter().map(|v| thresholds.partition_point(|t| t < v)).collect();
        ContourField { x, y, n, level }
    }
}

fn level_color(level: usize) -> RGBColor {
    let t = level as f64 / (CONTOUR_LEVELS - 1) as f64;
    let lerp = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * t).round() as u8;
    RGBColor(lerp(38, 250), lerp(20, 231), lerp(102, 120))
}

/// One optimizer path drawn over the filled contours.
pub fn path_plot(
    path: &Path,
    label: &str,
    field: &ContourField,
    traj: &Trajectory,
    target: &ParamVector,
) -> spiopt_core::Result<()> {
    let err = plot_err(path);
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(&err)?;
    let (x, y) = (field.x, field.y);
    let mut chart = ChartBuilder::on(&root)
        .caption(label, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(48)
        .build_cartesian_2d(x.0..x.1, y.0..y.1)
        .map_err(&err)?;
    chart
        .configure_mesh()
        .disable_mesh()
        .x_desc("theta_1")
        .y_desc("theta_2")
        .draw()
        .map_err(&err)?;

    let n = field.n;
    let dx = (x.1 - x.0) / n as f64;
    let dy = (y.1 - y.0) / n as f64;
    let mut cells = Vec::new();
    for j in 0..n {
        let row = &field.level[j * n..(j + 1) * n];
        let mut start = 0;
        // merge runs of equal level along the row
        for i in 1..=n {
            if i == n || row[i] != row[start] {
                let x0 = x.0 + start as f64 * dx;
                let x1 = x.0 + i as f64 * dx;
                let y0 = y.0 + j as f64 * dy;
                cells.push(Rectangle::new(
                    [(x0, y0), (x1, y0 + dy)],
                    level_color(row[start]).filled(),
                ));
                start = i;
            }
        }
    }
    chart.draw_series(cells).map_err(&err)?;

    let clamp = |p: &ParamVector| (p[0].clamp(x.0, x.1), p[1].clamp(y.0, y.1));
    let points: Vec<(f64, f64)> = traj.thetas().take_while(|p| p.is_finite()).map(clamp).collect();
    chart
        .draw_series(LineSeries::new(points.iter().copied(), RED.stroke_width(2)))
        .map_err(&err)?;
    if let Some(first) = points.first() {
        chart
            .draw_series(std::iter::once(Circle::new(*first, 5, WHITE.filled())))
            .map_err(&err)?;
    }
    chart
        .draw_series(std::iter::once(Cross::new(clamp(target), 7, BLACK.stroke_width(2))))
        .map_err(&err)?;
    root.present().map_err(&err)?;
    Ok(())
}
