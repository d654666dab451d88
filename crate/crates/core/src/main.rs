use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "npde",
    about = "Periodic solutions of neutral delay evolution equations",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key = value configuration file with per-subcommand sections.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for reports and CSV files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Number of sine modes N.
    #[arg(long, global = true)]
    modes: Option<usize>,

    /// Number of time-grid points per period M_t.
    #[arg(long = "time-grid", global = true)]
    time_grid: Option<usize>,

    /// Number of spatial intervals M_x.
    #[arg(long = "space-grid", global = true)]
    space_grid: Option<usize>,

    /// Picard stopping tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Picard iteration cap.
    #[arg(long = "max-iter", global = true)]
    max_iter: Option<usize>,

    /// Fractional-power convention.
    #[arg(long, global = true, value_parser = ["eigen", "paper"])]
    convention: Option<String>,

    /// Seed for randomized initial guesses.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the existence/uniqueness/regularity conditions.
    Check,
    /// Compute the periodic solution by Picard iteration.
    Solve,
    /// Integrate the initial-value problem by the method of steps.
    Simulate,
    /// Simulate and report per-period distances to the periodic solution.
    Compare,
    /// Build a manufactured problem bundle from a recipe.
    Manufacture,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides: Vec<(String, String)> = Vec::new();
    if let Some(v) = cli.modes {
        overrides.push(("n_modes".into(), v.to_string()));
    }
    if let Some(v) = cli.time_grid {
        overrides.push(("m_t".into(), v.to_string()));
    }
    if let Some(v) = cli.space_grid {
        overrides.push(("m_x".into(), v.to_string()));
    }
    if let Some(v) = cli.tol {
        overrides.push(("tol".into(), format!("{v:e}")));
    }
    if let Some(v) = cli.max_iter {
        overrides.push(("max_iter".into(), v.to_string()));
    }
    if let Some(v) = &cli.convention {
        overrides.push(("convention".into(), v.clone()));
    }
    if let Some(v) = cli.seed {
        overrides.push(("seed".into(), v.to_string()));
    }
    let name = match cli.command {
        Command::Check => "check",
        Command::Solve => "solve",
        Command::Simulate => "simulate",
        Command::Compare => "compare",
        Command::Manufacture => "manufacture",
    };
    let code = npde::cli::run(name, cli.config.as_deref(), &overrides, &cli.out);
    ExitCode::from(code as u8)
}
