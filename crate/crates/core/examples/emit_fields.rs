//! Runs a configured command through the library and writes the report and
//! the emitted fields, then reads one field back.
//!
//! `cargo run --release --example emit_fields [OUT_DIR]`

use std::path::PathBuf;

use hermtorus::cli::{execute, read_field, write_outputs, Command, FieldFormat, RunConfig};
use hermtorus::fixtures;

fn main() -> hermtorus::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hermtorus-emit"));
    let mut config = RunConfig::new(16, fixtures::f1(2));
    config.command = Some(Command::Gauduchon);
    config.seed = 5;
    config.output.dir = out.clone();
    config.output.emit_fields = true;
    config.output.field_format = FieldFormat::Csv;
    config.output.slices = vec![[0, 2]];

    let outcome = execute(&config)?;
    write_outputs(&config, &outcome)?;
    for c in &outcome.report.checks {
        println!("{:<28} {:.3e} <= {:.1e}: {}", c.name, c.value, c.tolerance, c.pass);
    }

    let f0 = read_field(&out.join("fields").join("f0.csv"))?;
    let (lo, hi) = f0.min_max_re();
    println!("f0 read back from {}: [{lo:.6}, {hi:.6}]", out.display());
    Ok(())
}
