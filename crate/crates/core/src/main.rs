use std::path::PathBuf;

use clap::Parser;
use hermtorus::cli::{run, Overrides};

/// Hermitian geometry workbench on flat complex tori.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long)]
    config: PathBuf,
    /// curvature, gauduchon, normalize, bundle-cert or identities; overrides the config.
    #[arg(long)]
    command: Option<String>,
    /// Output directory for report.json, timings.json and fields.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Samples per real axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Write sampled fields next to the report.
    #[arg(long)]
    emit_fields: bool,
}

fn main() {
    let a = Args::parse();
    let overrides = Overrides { command: a.command, out: a.out, seed: a.seed, tol: a.tol, grid: a.grid, emit_fields: a.emit_fields };
    std::process::exit(run(&a.config, &overrides));
}
