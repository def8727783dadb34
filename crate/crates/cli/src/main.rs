use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spiopt_cli::config::ExperimentConfig;
use spiopt_cli::nn_suite::{run_nn, write_nn, NnConfig};
use spiopt_cli::output::output_root;
use spiopt_cli::race::{format_summary, run_race, write_race};
use spiopt_cli::suites::{format_gradcheck, run_gradcheck, run_theorem, write_theorem};
use spiopt_core::Error;

#[derive(Parser)]
#[command(
    name = "spiopt",
    version,
    about = "Optimizer races, bound sweeps and MLP robustness sweeps"
)]
struct Cli {
    /// Output root (overrides SPIOPT_OUT; default ./spiopt-out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Race the configured optimizers on one objective
    Race {
        config: PathBuf,
        /// Skip SVG output
        #[arg(long)]
        no_plots: bool,
    },
    /// Check the convergence bound on random strongly convex quadratics
    Theorem {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Learning-rate sweep on the small MLP
    Nn { config: PathBuf },
    /// Finite-difference audit of every analytic gradient
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn exit_for(err: &Error) -> ExitCode {
    match err {
        Error::Io(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = output_root(cli.out.as_deref());
    let result = match cli.command {
        Command::Race { config, no_plots } => ExperimentConfig::from_path(&config).and_then(|cfg| {
            let outcome = run_race(&cfg)?;
            let files = write_race(&cfg, &outcome, &root, !no_plots)?;
            println!("{}", format_summary(&outcome, cfg.metrics.hit_tol));
            println!(
                "wrote {} csv and {} plot files under {}",
                files.csv.len(),
                files.plots.len(),
                root.display()
            );
            Ok(true)
        }),
        Command::Theorem { samples, seed } => run_theorem(samples as usize, seed).and_then(|rows| {
            let path = write_theorem(&rows, &root)?;
            let failed = rows.iter().filter(|r| !r.bound_holds).count();
            let worst = rows.iter().map(|r| r.worst_margin).fold(f64::INFINITY, f64::min);
            println!(
                "{} instances, {} violations, worst margin {worst:e}; wrote {}",
                rows.len(),
                failed,
                path.display()
            );
            Ok(failed == 0)
        }),
        Command::Nn { config } => NnConfig::from_path(&config).and_then(|cfg| {
            let points = run_nn(&cfg)?;
            for p in &points {
                println!(
                    "{:<8} r={:<8} diverged={:<5} acc={}",
                    p.optimizer.to_string(),
                    p.r,
                    p.report.diverged,
                    p.report
                        .final_accuracy()
                        .filter(|_| !p.report.diverged)
                        .map_or("-".into(), |a| format!("{a:.4}"))
                );
            }
            let files = write_nn(&cfg, &points, &root)?;
            println!("wrote {}", files[0].display());
            Ok(true)
        }),
        Command::Gradcheck { seed } => {
            let rows = run_gradcheck(seed);
            println!("{}", format_gradcheck(&rows));
            Ok(rows.iter().all(|r| r.passed))
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("spiopt: {e}");
            exit_for(&e)
        }
    }
}
