//! Run configuration, command pipelines, JSON reports and field output.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

mod commands;
mod config;
mod emit;
mod report;

pub use commands::{
    cmd_bundle_cert, cmd_curvature, cmd_gauduchon, cmd_identities, cmd_normalize, execute, gauduchon_options, Outcome,
};
pub use config::{
    BundleConfig, Command, FieldFormat, GridConfig, OutputConfig, RunConfig, Sampling, Tolerances, SCHEMA_VERSION,
};
pub use emit::{axis_names, emit_field, emit_slice, read_field};
pub use report::{Check, Report, Status, Timings};

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Replaces the solver tolerance.
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub emit_fields: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) -> Result<()> {
        if let Some(c) = &self.command {
            config.command = Some(Command::parse(c)?);
        }
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(tol) = self.tol {
            config.tolerances.solver = tol;
        }
        if let Some(n) = self.grid {
            config.grid.samples = n;
        }
        config.output.emit_fields |= self.emit_fields;
        config.validate()
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } => 5,
        Error::Config(_)
        | Error::Json(_)
        | Error::InvalidGrid(_)
        | Error::MemoryBudget { .. }
        | Error::NotHermitian { .. }
        | Error::PositivityViolation { .. }
        | Error::DimensionTooLow(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Writes `report.json`, `timings.json` and, when enabled, the fields.
pub fn write_outputs(config: &RunConfig, outcome: &Outcome) -> Result<()> {
    let dir = &config.output.dir;
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), outcome.report.to_json() + "\n")?;
    let timings = serde_json::to_string_pretty(&outcome.timings)?;
    fs::write(dir.join("timings.json"), timings + "\n")?;
    if config.output.emit_fields {
        let fields = dir.join("fields");
        fs::create_dir_all(&fields)?;
        let ext = match config.output.field_format {
            FieldFormat::Csv => "csv",
            FieldFormat::Json => "json",
        };
        for (name, field) in &outcome.fields {
            emit_field(field, name, &fields.join(format!("{name}.{ext}")), config.output.field_format)?;
            for axes in &config.output.slices {
                emit_slice(field, *axes, &fields.join(format!("{name}_slice_{}_{}.csv", axes[0], axes[1])))?;
            }
        }
    }
    Ok(())
}

/// Loads, overrides, executes and writes; returns the process exit code.
pub fn run(config_path: &Path, overrides: &Overrides) -> i32 {
    let result = (|| -> Result<(RunConfig, Outcome)> {
        let mut config = RunConfig::load(config_path)?;
        overrides.apply(&mut config)?;
        let outcome = execute(&config)?;
        write_outputs(&config, &outcome)?;
        Ok((config, outcome))
    })();
    match result {
        Ok((config, outcome)) => {
            let r = &outcome.report;
            for c in &r.checks {
                println!("{} {:<32} {:>12.3e} (tol {:.1e})", if c.pass { "pass" } else { "FAIL" }, c.name, c.value, c.tolerance);
            }
            println!("{}: {:?}, report in {}", r.command, r.status, config.output.dir.join("report.json").display());
            r.status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
