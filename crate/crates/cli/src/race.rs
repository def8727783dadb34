//! Optimizer races on one objective.

use std::path::{Path, PathBuf};
use std::thread;

use spiopt_core::{
    oscillation_report, run, Error, Objective, OscillationReport, ParamVector, Result, RunConfig, Trajectory,
};

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, fmt_opt, write_csv};
use crate::plot;

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone)]
pub struct RaceEntry {
    pub label: String,
    pub config: RunConfig,
    pub trajectory: Trajectory,
    pub report: OscillationReport,
}

#[derive(Debug, Clone)]
pub struct RaceOutcome {
    pub target: ParamVector,
    /// Objective value at the target, for loss gaps.
    pub f_target: f64,
    pub entries: Vec<RaceEntry>,
}

/// Runs every optimizer of the experiment on its own thread.
pub fn run_race(cfg: &ExperimentConfig) -> Result<RaceOutcome> {
    let objective = cfg.objective()?;
    let target = cfg.target(objective.as_ref())?;
    let runs = cfg.run_configs()?;
    let obj: &dyn Objective = objective.as_ref();
    let trajectories: Vec<Result<Trajectory>> = thread::scope(|s| {
        let handles: Vec<_> = runs.iter().map(|(_, rc)| s.spawn(move || run(obj, rc))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    });
    let mut entries = Vec::with_capacity(runs.len());
    for ((label, config), traj) in runs.into_iter().zip(trajectories) {
        let trajectory = traj?;
        let report = oscillation_report(&trajectory, &target, cfg.metrics.settle_tol, cfg.metrics.hit_tol)?;
        entries.push(RaceEntry {
            label,
            config,
            trajectory,
            report,
        });
    }
    Ok(RaceOutcome {
        f_target: obj.value(&target),
        target,
        entries,
    })
}

fn hit_header(tol: f64) -> String {
    format!("first_hit_{tol:e}")
}

/// Summary table; one row per optimizer.
pub fn summary_rows(outcome: &RaceOutcome, hit_tol: f64) -> (Vec<String>, Vec<Vec<String>>) {
    let header = vec![
        "optimizer".to_string(),
        "settling_time".to_string(),
        "max_overshoot_dim1".to_string(),
        "max_overshoot_dim2".to_string(),
        hit_header(hit_tol),
        "diverged".to_string(),
    ];
    let rows = outcome
        .entries
        .iter()
        .map(|e| {
            let dims = &e.report.per_dimension;
            vec![
                e.label.clone(),
                fmt_opt(e.report.settling_time),
                dims.first().map_or(String::new(), |d| fmt_f64(d.max_overshoot)),
                dims.get(1).map_or(String::new(), |d| fmt_f64(d.max_overshoot)),
                fmt_opt(e.report.hit_epoch_residual),
                e.trajectory.diverged.to_string(),
            ]
        })
        .collect();
    (header, rows)
}

/// Per-step trajectory table.
pub fn trajectory_rows(traj: &Trajectory, f_target: f64) -> (Vec<String>, Vec<Vec<String>>) {
    let dim = traj.dim();
    let mut header = vec!["step".to_string()];
    header.extend((1..=dim).map(|i| format!("theta_{i}")));
    header.extend(
        ["loss", "loss_gap", "residual_norm", "state_delay", "gate_mask"]
            .iter()
            .map(|s| s.to_string()),
    );
    let rows = traj
        .points
        .iter()
        .map(|p| {
            let mut row = vec![p.step.to_string()];
            row.extend(p.theta.iter().map(|x| fmt_f64(*x)));
            row.push(fmt_f64(p.loss));
            row.push(fmt_f64((p.loss - f_target).abs()));
            row.push(fmt_f64(p.residual_norm));
            row.push(fmt_f64(p.state_delay));
            row.push(p.gate_mask.iter().map(|g| if *g { '1' } else { '0' }).collect());
            row
        })
        .collect();
    (header, rows)
}

#[derive(Debug, Clone, Default)]
pub struct RaceFiles {
    pub csv: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

/// Writes trajectory CSVs, the summary and the plots.
pub fn write_race(cfg: &ExperimentConfig, outcome: &RaceOutcome, root: &Path, plots: bool) -> Result<RaceFiles> {
    let csv_dir = cfg.csv_dir(root);
    let mut files = RaceFiles::default();
    for e in &outcome.entries {
        let (header, rows) = trajectory_rows(&e.trajectory, outcome.f_target);
        let path = csv_dir.join(format!("{}.csv", e.label));
        write_csv(&path, &header, &rows)?;
        files.csv.push(path);
    }
    let (header, rows) = summary_rows(outcome, cfg.metrics.hit_tol);
    let path = csv_dir.join(SUMMARY_FILE);
    write_csv(&path, &header, &rows)?;
    files.csv.push(path);

    if plots {
        let plot_dir = cfg.plot_dir(root);
        std::fs::create_dir_all(&plot_dir).map_err(|e| Error::Io(format!("{}: {e}", plot_dir.display())))?;
        let series: Vec<(String, Vec<f64>)> = outcome
            .entries
            .iter()
            .map(|e| (e.label.clone(), e.trajectory.loss_gap(outcome.f_target)))
            .collect();
        let loss_path = plot_dir.join("loss.svg");
        plot::loss_plot(&loss_path, &cfg.name, &series)?;
        files.plots.push(loss_path);

        let objective = cfg.objective()?;
        if objective.dim() == 2 {
            let domain = objective.domain().unwrap_or_else(|| vec![(-3.0, 3.0), (-3.0, 3.0)]);
            let field = plot::ContourField::sample(objective.as_ref(), &domain, plot::CONTOUR_GRID);
            for e in &outcome.entries {
                let path = plot_dir.join(format!("path_{}.svg", e.label));
                plot::path_plot(&path, &e.label, &field, &e.trajectory, &outcome.target)?;
                files.plots.push(path);
            }
        }
    }
    Ok(files)
}

/// Human-readable summary for the terminal.
pub fn format_summary(outcome: &RaceOutcome, hit_tol: f64) -> String {
    let (header, rows) = summary_rows(outcome, hit_tol);
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(&header);
    for row in &rows {
        out.push('\n');
        out.push_str(&line(row));
    }
    out
}
